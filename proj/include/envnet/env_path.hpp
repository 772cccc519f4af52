#pragma once

#include <utility>
#include <vector>

#include "envnet/model.hpp"
#include "envnet/rng.hpp"

namespace envnet {

/// A realised environment trajectory: alternating (state, holding time)
/// segments. Consecutive segment states always differ; the final segment may
/// be truncated at total_time. Immutable once built.
struct EnvPath {
  struct Segment {
    int state;
    double length;  // > 0
  };

  int initial_state = 0;
  std::vector<Segment> segments;
  double total_time = 0.0;
  std::vector<double> jump_times;  // prefix sums: T_0 = 0 < T_1 < ... < total_time

  int segment_count() const { return static_cast<int>(segments.size()); }
  /// Index of the segment whose half-open interval [T_k, T_{k+1}) contains t;
  /// t == total_time maps to the last segment.
  int segment_index(double t) const;
  int state_at(double t) const { return segments[static_cast<std::size_t>(segment_index(t))].state; }
  /// Start time of segment k.
  double segment_start(int k) const { return jump_times[static_cast<std::size_t>(k)]; }
  double segment_end(int k) const {
    return k + 1 < segment_count() ? jump_times[static_cast<std::size_t>(k) + 1] : total_time;
  }
};

/// Return times to an anchor state along a path: taus[k] is the start of the
/// k-th visit (tau_0 = 0 when the path starts at the anchor).
struct ReturnIndex {
  int anchor = 0;
  std::vector<double> taus;

  /// n(t) = sup{ n : tau_n <= t }; right-continuous and nondecreasing.
  int n_of(double t) const;
};

/// Exact Gillespie trajectory of the environment chain over [0, horizon].
/// Throws PreconditionError on an absorbing state (only possible when the
/// state space is a singleton; see duplicate_singleton).
EnvPath simulate_env(const EnvironmentSpec& env, int x0, double horizon, RngStream& rng);
EnvPath simulate_env(const EnvironmentSpec& env, int x0, double horizon, std::uint64_t seed);

/// Path started at the anchor and extended exactly until the k-th return;
/// the returned index holds tau_0 .. tau_k.
std::pair<EnvPath, ReturnIndex> simulate_env_until_return(const EnvironmentSpec& env, int x, int k,
                                                          RngStream& rng);
std::pair<EnvPath, ReturnIndex> simulate_env_until_return(const EnvironmentSpec& env, int x, int k,
                                                          std::uint64_t seed);

/// Replaces a one-state environment by two equivalent clone states with unit
/// switching rates, so return-time machinery applies. Rate tables of a model
/// using the result must be copied to both clones (see clone_network).
EnvironmentSpec duplicate_singleton(const EnvironmentSpec& env);

/// Applies duplicate_singleton to a whole network, duplicating rate tables.
ModulatedNetwork clone_network(const ModulatedNetwork& net);

}  // namespace envnet
