#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "envnet/env_path.hpp"
#include "envnet/model.hpp"
#include "envnet/propagator.hpp"
#include "envnet/rng.hpp"

namespace envnet {

using Counts = Eigen::VectorXi;

/// All burst configurations nu with 1 <= sum(nu) <= m over d species, in
/// lexicographic order. Throws NumericError when the configuration count
/// would exceed the documented cap (binomial(m + d, d) <= 1e5).
std::vector<Counts> configurations(int m, int d);

/// Probability that a burst of m molecules, injected with survival column p
/// (entries of Phi(u, t) e_j; implicit death cell 1 - sum p), lands exactly
/// on the configuration nu.
double g_config(const Eigen::VectorXd& p, const Counts& nu, int m);

struct BurstIntensity {
  int channel;  // produced species j
  Counts nu;
  double intensity;
};

struct QuadratureOptions {
  double rel_tol = 1e-9;
  int max_depth = 30;
};

/// Poisson intensities of the per-configuration burst components,
/// int_0^t rate_j(X(u)) g(nu; Phi(u,t) e_j) du, by per-segment adaptive
/// Gauss-Legendre quadrature. With every burst size <= 1 this reduces to the
/// accumulated production vector (returned through `poisson_vector`/`W`).
struct BurstLaw {
  bool poisson_vector = false;
  Eigen::VectorXd W;                      // set when poisson_vector
  std::vector<BurstIntensity> intensities;  // set otherwise
};

BurstLaw burst_intensities(const ModulatedNetwork& net, const EnvPath& path, double t,
                           const QuadratureOptions& opts = {});

/// Exact draws of Z(t) given the path: multinomial survival of the initial
/// molecules plus Poisson birth times thinned segment-by-segment, each birth
/// propagated forward with its own survival column. No intensity quadrature.
std::vector<Counts> sample_finite_time(const ModulatedNetwork& net, const EnvPath& path, double t,
                                       const Counts& z0, std::uint64_t seed, long replicas);

/// Conditional pmf of Z(t) on the box 0 <= z_i <= cap_i, by lattice
/// convolution of the multinomial and Poisson components. `covered` reports
/// the probability mass retained on the box.
struct PmfTable {
  std::vector<int> caps;
  std::vector<double> values;  // lexicographic over the box, last axis fastest
  double covered = 0.0;

  double at(const Counts& z) const;
};

PmfTable finite_time_pmf(const ModulatedNetwork& net, const EnvPath& path, double t, const Counts& z0,
                         const std::vector<int>& caps, const QuadratureOptions& opts = {});

/// Single-point evaluation; throws NumericError when z exceeds the lattice cap.
double pmf_finite_time(const ModulatedNetwork& net, const EnvPath& path, double t, const Counts& z0,
                       const Counts& z, const std::vector<int>& caps, const QuadratureOptions& opts = {});

// -- exact joint simulation ---------------------------------------------------

struct JointEvent {
  double time;
  int env_state;
  Counts counts;
};

/// Exact Gillespie simulation of the coupled (environment, counts) chain
/// under stochastic mass-action kinetics. Works on any structurally valid
/// model, including ones rejected by the mono-molecular validator. The
/// visitor sees the state after every jump; the step budget guards
/// near-explosive inputs.
void ssa_scan(const RawModel& model, int x0, const Counts& z0, double horizon, std::uint64_t seed,
              long max_steps, const std::function<void(const JointEvent&)>& visit);

std::vector<JointEvent> ssa_joint(const RawModel& model, int x0, const Counts& z0, double horizon,
                                  std::uint64_t seed, long max_steps = 50'000'000);

/// Z(horizon) for `replicas` independent joint runs.
std::vector<Counts> ssa_endpoints(const RawModel& model, int x0, const Counts& z0, double horizon,
                                  std::uint64_t seed, long replicas, long max_steps = 50'000'000,
                                  int threads = 1);

}  // namespace envnet
