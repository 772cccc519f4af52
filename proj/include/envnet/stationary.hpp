#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "envnet/finite_time.hpp"
#include "envnet/model.hpp"
#include "envnet/structure.hpp"

namespace envnet {

/// One draw from the mixing measure at an anchor state: u_matrix carries the
/// surviving-molecule channel for closed components, w_vector the Poisson
/// intensity of produced molecules, U the exponential holding draw.
struct MixtureAtom {
  Eigen::MatrixXd u_matrix;
  Eigen::VectorXd w_vector;
  double U = 0.0;
};

struct SreOptions {
  int threads = 1;
  double product_tol = 1e-10;    // stop the matrix product on this successive change
  double column_spread_tol = 1e-6;  // identical-columns check once converged
};

/// Iterates V_k = C_k V_{k-1} + D_k from V_0 = 0 over n i.i.d. return cycles
/// per replica, together with the running matrix product, then applies the
/// independent exponential holding factor. Requires the ergodicity verdict to
/// hold and no transient species; a singleton environment is routed through
/// duplicate_singleton internally.
std::vector<MixtureAtom> sre_sample(const ModulatedNetwork& net, int anchor, int n,
                                    std::uint64_t seed, long replicas, const SreOptions& opts = {});

/// Count samples from the conditional stationary law at the anchor:
/// Pois(w_vector) plus one multinomial per closed component with the given
/// conserved totals. Requires every burst size <= 1.
std::vector<Counts> stationary_sample(const ModulatedNetwork& net, int anchor,
                                      const std::vector<long>& component_totals, int n,
                                      std::uint64_t seed, long replicas, const SreOptions& opts = {});

struct MomentTable {
  std::vector<double> values;  // index q = 0..q_max
  std::vector<double> ses;     // batch standard errors (0 for q = 0)
};

/// Factorial moments for d = 1 by the cycle recursion, averaged over anchor
/// states with the environment's stationary weights. Throws NumericError when
/// the denominator estimate 1 - E[C^q] is not confidently positive.
MomentTable factorial_moments(const ModulatedNetwork& net, const Eigen::VectorXd& pi, int q_max,
                              long cycles, std::uint64_t seed, int threads = 1);

/// Monte Carlo factorial moment for general d at one anchor (mean of
/// prod_i w_i^{q_i} over mixing-measure atoms); returns (estimate, se).
std::pair<double, double> factorial_moment_mc(const ModulatedNetwork& net, int anchor,
                                              const Counts& q, int n, std::uint64_t seed,
                                              long replicas, const SreOptions& opts = {});

/// Convergence certificate for the cycle iteration: bound(n) = M_hat e^{-r_hat n}
/// on the Wasserstein distance to the mixing measure. Only valid in the
/// one-cycle contraction regime; refused otherwise.
struct ErrorCertificate {
  bool available = false;
  double M_hat = 0.0;
  double r_hat = 0.0;
  double c_mean = 0.0;  // estimate of E ||C||_1
  double c_se = 0.0;

  double bound(int n) const { return M_hat * std::exp(-r_hat * n); }
  /// Smallest n with bound(n) < eps.
  int iterations_for(double eps) const;
};

ErrorCertificate error_certificate(const ModulatedNetwork& net, int anchor, std::uint64_t seed,
                                   long replicas, int threads = 1);

}  // namespace envnet
