#include <doctest.h>

#include <cmath>

#include "support.hpp"

using namespace envnet;
using testsupport::birth_death_two_state;
using testsupport::random_network;
using testsupport::simpson;

namespace {

// Brute-force oracle: plain 200-term Taylor summation, no uniformization.
Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& a, double h) {
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd acc = term;
  for (int n = 1; n <= 200; ++n) {
    term = (a * term) * (h / n);
    acc += term;
  }
  return acc;
}

Eigen::MatrixXd random_subgenerator(RngStream& rng, int d) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i)
      if (i != j && rng.uniform() < 0.7) a(i, j) = 2.5 * rng.uniform();
    a(j, j) = -a.col(j).sum() - (rng.uniform() < 0.7 ? 1.5 * rng.uniform() : 0.0);
  }
  return a;
}

// Piecewise-constant fourth-order integration of the matrix equation
// H' = A(t) H across path segments; independent of the product construction.
Eigen::MatrixXd rk4_phi(const Modulation& mod, const EnvPath& path, double u, double t,
                        int steps_per_segment = 4000) {
  const int d = mod.dim();
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(d, d);
  int first = path.segment_index(u);
  while (u < t) {
    double seg_end = std::min(path.segment_end(first), t);
    const Eigen::MatrixXd& a = mod.A[static_cast<std::size_t>(path.segments[static_cast<std::size_t>(first)].state)];
    double len = seg_end - u;
    if (len > 0.0) {
      double dt = len / steps_per_segment;
      for (int s = 0; s < steps_per_segment; ++s) {
        Eigen::MatrixXd k1 = a * h;
        Eigen::MatrixXd k2 = a * (h + 0.5 * dt * k1);
        Eigen::MatrixXd k3 = a * (h + 0.5 * dt * k2);
        Eigen::MatrixXd k4 = a * (h + dt * k3);
        h += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
    }
    u = seg_end;
    ++first;
  }
  return h;
}

}  // namespace

TEST_CASE("matrix exponential: scalar, identity, and Taylor oracle") {
  Eigen::MatrixXd a(1, 1);
  a << -1.7;
  CHECK(expm_subgen(a, 0.9)(0, 0) == doctest::Approx(std::exp(-1.7 * 0.9)).epsilon(1e-13));
  CHECK(expm_subgen(a, 0.0)(0, 0) == 1.0);

  RngStream rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    Eigen::MatrixXd m = random_subgenerator(rng, 4);
    Eigen::MatrixXd fast = expm_subgen(m, 0.7);
    Eigen::MatrixXd slow = expm_taylor(m, 0.7);
    CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-12);
    for (int j = 0; j < 4; ++j) {
      CHECK(fast.col(j).minCoeff() >= 0.0);
      CHECK(fast.col(j).sum() <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("matrix exponential stays structured for long horizons") {
  RngStream rng(6);
  Eigen::MatrixXd m = random_subgenerator(rng, 5);
  for (double h : {10.0, 100.0, 3000.0}) {
    Eigen::MatrixXd e = expm_subgen(m, h);
    CHECK(e.minCoeff() >= 0.0);
    for (int j = 0; j < 5; ++j) CHECK(e.col(j).sum() <= 1.0 + 1e-12);
  }
}

TEST_CASE("expm_apply agrees with the full exponential") {
  RngStream rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd m = random_subgenerator(rng, 5);
    Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(5, [&](int) { return rng.uniform(); });
    CHECK((expm_apply(m, 1.3, v) - expm_subgen(m, 1.3) * v).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("accumulated production: closed forms and quadrature oracle") {
  // One species: G(h) = k1/k2 (1 - e^{-k2 h}), degenerating to k1 h.
  Modulation mod;
  mod.A = {Eigen::MatrixXd::Constant(1, 1, -2.0)};
  mod.B = {Eigen::VectorXd::Constant(1, 3.0)};
  CHECK(segment_production(mod, 0, 1.1)(0) ==
        doctest::Approx(3.0 / 2.0 * (1.0 - std::exp(-2.0 * 1.1))).epsilon(1e-12));
  mod.A[0](0, 0) = 0.0;
  CHECK(segment_production(mod, 0, 1.1)(0) == doctest::Approx(3.0 * 1.1).epsilon(1e-12));

  RngStream rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd a = random_subgenerator(rng, 3);
    Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(3, [&](int) { return 2.0 * rng.uniform(); });
    SegmentPropagator sp = segment_propagator(a, b, 0.8);
    for (int i = 0; i < 3; ++i) {
      double direct = simpson([&](double u) { return (expm_taylor(a, u) * b)(i); }, 0.0, 0.8, 1e-13);
      CHECK(sp.g(i) == doctest::Approx(direct).epsilon(1e-10));
    }
    CHECK((sp.E - expm_taylor(a, 0.8)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("propagate: empty span, single segment, composition, and ODE oracle") {
  RngStream rng(10);
  ModulatedNetwork net = random_network(rng, 4, 5);
  Modulation mod = build_modulation(net);
  EnvPath path = simulate_env(net.env, 0, 8.0, rng);

  PathPropagator empty = propagate(mod, path, 3.0, 3.0);
  CHECK(empty.phi.isIdentity(0.0));
  CHECK(empty.w.cwiseAbs().maxCoeff() == 0.0);

  // Single-segment span sits inside the first segment.
  double inner = 0.5 * path.segments.front().length;
  PathPropagator single = propagate(mod, path, 0.1 * inner, inner);
  SegmentPropagator direct = segment_propagator(mod, path.segments.front().state, inner - 0.1 * inner);
  CHECK((single.phi - direct.E).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((single.w - direct.g).cwiseAbs().maxCoeff() < 1e-14);

  for (int trial = 0; trial < 12; ++trial) {
    double a = 8.0 * rng.uniform(), c = 8.0 * rng.uniform();
    if (a > c) std::swap(a, c);
    double b = a + (c - a) * rng.uniform();
    PathPropagator whole = propagate(mod, path, a, c);
    PathPropagator left = propagate(mod, path, a, b);
    PathPropagator right = propagate(mod, path, b, c);
    PathPropagator glued = compose(right, left);
    CHECK((whole.phi - glued.phi).cwiseAbs().maxCoeff() < 1e-11);
    CHECK((whole.w - glued.w).cwiseAbs().maxCoeff() < 1e-11);
  }

  PathPropagator pp = propagate(mod, path, 0.7, 5.3);
  CHECK((pp.phi - rk4_phi(mod, path, 0.7, 5.3)).cwiseAbs().maxCoeff() < 1e-10);

  CHECK_THROWS_AS(propagate(mod, path, -0.1, 1.0), PreconditionError);
  CHECK_THROWS_AS(propagate(mod, path, 0.0, 9.0), PreconditionError);
}

TEST_CASE("propagator solves its differential equations (finite differences)") {
  RngStream rng(12);
  ModulatedNetwork net = random_network(rng, 4, 4);
  Modulation mod = build_modulation(net);
  EnvPath path = simulate_env(net.env, 0, 6.0, rng);

  const double eps = 1e-7;
  int checked = 0;
  for (double t = 0.4; t < 5.9 && checked < 8; t += 0.61) {
    int k = path.segment_index(t);
    // Stay away from jump times so t and t + eps share a segment.
    if (t - path.segment_start(k) < 1e-3 || path.segment_end(k) - t < 1e-3) continue;
    ++checked;
    const auto& a = mod.A[static_cast<std::size_t>(path.segments[static_cast<std::size_t>(k)].state)];
    const auto& b = mod.B[static_cast<std::size_t>(path.segments[static_cast<std::size_t>(k)].state)];
    PathPropagator now = propagate(mod, path, 0.0, t);
    PathPropagator later = propagate(mod, path, 0.0, t + eps);
    Eigen::MatrixXd dphi = (later.phi - now.phi) / eps;
    CHECK((dphi - a * now.phi).cwiseAbs().maxCoeff() < 1e-6);
    Eigen::VectorXd dw = (later.w - now.w) / eps;
    CHECK((dw - (a * now.w + b)).cwiseAbs().maxCoeff() < 1e-6);
  }
  CHECK(checked > 0);
}

TEST_CASE("cycle blocks are substochastic with nonnegative production") {
  ModulatedNetwork net = validate_network(birth_death_two_state(1.0, 2.0, 0.5, 1.5));
  Modulation mod = build_modulation(net);
  RngStream rng(14);
  auto [path, ret] = simulate_env_until_return(net.env, 0, 6, rng);
  CycleBlocks blocks = cycle_blocks(mod, path, ret, 6);
  REQUIRE(blocks.C.size() == 6);
  for (std::size_t k = 0; k < blocks.C.size(); ++k) {
    CHECK(blocks.C[k](0, 0) > 0.0);
    CHECK(blocks.C[k](0, 0) <= 1.0 + 1e-12);
    CHECK(blocks.D[k](0) >= 0.0);
    // One-species case: the block is the survival factor over the cycle.
    PathPropagator pp = propagate(mod, path, ret.taus[k], ret.taus[k + 1]);
    CHECK(blocks.C[k](0, 0) == doctest::Approx(pp.phi(0, 0)));
  }
  CHECK_THROWS_AS(cycle_blocks(mod, path, ret, 9), PreconditionError);
}

TEST_CASE("empirical mean of the scalar cycle block matches two-exponential quadrature") {
  // Anchored at lo, a cycle is Exp(q01) in lo plus Exp(q10) in hi, and the
  // block is exp(-k2_lo T1 - k2_hi T2); the mean factorizes into two
  // one-dimensional integrals computed by brute force.
  const double k2_lo = 0.8, k2_hi = 1.7, q01 = 1.0, q10 = 2.0;
  ModulatedNetwork net = validate_network(birth_death_two_state(1, 1, k2_lo, k2_hi, q01, q10));
  Modulation mod = build_modulation(net);

  const long reps = 200000;
  RngStream rng(15);
  double mean = 0.0, sq = 0.0;
  for (long r = 0; r < reps; ++r) {
    auto [path, ret] = simulate_env_until_return(net.env, 0, 1, rng);
    double c = cycle_blocks(mod, path, ret, 1).C[0](0, 0);
    mean += c;
    sq += c * c;
  }
  mean /= static_cast<double>(reps);
  double se = std::sqrt((sq / reps - mean * mean) / reps);

  double exact_lo = simpson([&](double u) { return std::exp(-k2_lo * u) * q01 * std::exp(-q01 * u); },
                            0.0, 60.0, 1e-12);
  double exact_hi = simpson([&](double u) { return std::exp(-k2_hi * u) * q10 * std::exp(-q10 * u); },
                            0.0, 60.0, 1e-12);
  CHECK(std::abs(mean - exact_lo * exact_hi) < 3.0 * se + 1e-4);
}

TEST_CASE("path kernel answers interior queries consistently") {
  RngStream rng(16);
  ModulatedNetwork net = random_network(rng, 5, 4);
  Modulation mod = build_modulation(net);
  EnvPath path = simulate_env(net.env, 0, 7.0, rng);
  const double t = 6.2;
  PathKernel kernel(mod, path, t);
  for (double u : {0.0, 0.3, 1.9, 4.4, 6.19, t}) {
    Eigen::MatrixXd direct = propagate(mod, path, u, t).phi;
    CHECK((kernel.phi_from(u) - direct).cwiseAbs().maxCoeff() < 1e-12);
    for (int j = 0; j < net.species_count(); ++j)
      CHECK((kernel.phi_column(u, j) - direct.col(j)).cwiseAbs().maxCoeff() < 1e-12);
  }
}
