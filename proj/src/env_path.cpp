#include "envnet/env_path.hpp"

#include <algorithm>
#include <cmath>

#include "envnet/errors.hpp"

namespace envnet {

int EnvPath::segment_index(double t) const {
  if (t < 0.0 || t > total_time) throw PreconditionError("time outside path span");
  auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  int k = static_cast<int>(it - jump_times.begin()) - 1;
  return std::min(k, segment_count() - 1);
}

int ReturnIndex::n_of(double t) const {
  auto it = std::upper_bound(taus.begin(), taus.end(), t);
  return static_cast<int>(it - taus.begin()) - 1;
}

namespace {

// Draws the next state from row x of the generator.
int next_state(const EnvironmentSpec& env, int x, RngStream& rng) {
  const int m = env.size();
  std::vector<double> weights(static_cast<std::size_t>(m), 0.0);
  double total = 0.0;
  for (int y = 0; y < m; ++y) {
    if (y == x) continue;
    weights[static_cast<std::size_t>(y)] = env.generator(x, y);
    total += env.generator(x, y);
  }
  return rng.categorical(weights, total);
}

}  // namespace

EnvPath simulate_env(const EnvironmentSpec& env, int x0, double horizon, RngStream& rng) {
  if (horizon <= 0.0) throw PreconditionError("simulate_env: horizon must be positive");
  if (x0 < 0 || x0 >= env.size()) throw PreconditionError("simulate_env: unknown initial state");
  EnvPath path;
  path.initial_state = x0;
  double t = 0.0;
  int x = x0;
  while (t < horizon) {
    double q = env.exit_rate(x);
    if (q <= 0.0) throw PreconditionError("simulate_env: absorbing state '" +
                                          env.state_names[static_cast<std::size_t>(x)] + "'");
    double hold = rng.exponential(q);
    double len = std::min(hold, horizon - t);
    path.jump_times.push_back(t);
    path.segments.push_back({x, len});
    t += hold;
    if (t < horizon) x = next_state(env, x, rng);
  }
  path.total_time = horizon;
  return path;
}

EnvPath simulate_env(const EnvironmentSpec& env, int x0, double horizon, std::uint64_t seed) {
  RngStream rng(seed);
  return simulate_env(env, x0, horizon, rng);
}

std::pair<EnvPath, ReturnIndex> simulate_env_until_return(const EnvironmentSpec& env, int x, int k,
                                                          RngStream& rng) {
  if (x < 0 || x >= env.size()) throw PreconditionError("simulate_env_until_return: unknown anchor");
  if (env.size() < 2)
    throw PreconditionError("simulate_env_until_return: needs at least two states (see duplicate_singleton)");
  if (k < 0) throw PreconditionError("simulate_env_until_return: negative return count");

  EnvPath path;
  path.initial_state = x;
  ReturnIndex ret;
  ret.anchor = x;
  ret.taus.push_back(0.0);

  double t = 0.0;
  int state = x;
  int returns = 0;
  while (returns < k) {
    double q = env.exit_rate(state);
    if (q <= 0.0) throw PreconditionError("simulate_env_until_return: absorbing state");
    double hold = rng.exponential(q);
    int next = next_state(env, state, rng);
    path.jump_times.push_back(t);
    path.segments.push_back({state, hold});
    t += hold;
    state = next;
    if (state == x) {
      ++returns;
      ret.taus.push_back(t);
    }
  }
  path.total_time = t;
  return {std::move(path), std::move(ret)};
}

std::pair<EnvPath, ReturnIndex> simulate_env_until_return(const EnvironmentSpec& env, int x, int k,
                                                          std::uint64_t seed) {
  RngStream rng(seed);
  return simulate_env_until_return(env, x, k, rng);
}

EnvironmentSpec duplicate_singleton(const EnvironmentSpec& env) {
  if (env.size() != 1) throw PreconditionError("duplicate_singleton: environment is not a singleton");
  EnvironmentSpec out;
  out.state_names = {env.state_names[0] + "+0", env.state_names[0] + "+1"};
  out.generator = Eigen::MatrixXd(2, 2);
  out.generator << -1.0, 1.0, 1.0, -1.0;
  out.pi = Eigen::Vector2d(0.5, 0.5);
  out.mass_coverage = env.mass_coverage;
  return out;
}

ModulatedNetwork clone_network(const ModulatedNetwork& net) {
  ModulatedNetwork out = net;
  out.env = duplicate_singleton(net.env);
  for (auto& r : out.reactions) r.rate.values = {r.rate.values[0], r.rate.values[0]};
  return out;
}

}  // namespace envnet
