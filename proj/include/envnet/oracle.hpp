#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <vector>

#include "envnet/finite_time.hpp"
#include "envnet/model.hpp"

namespace envnet {

/// Enumeration of the truncated joint space: pairs (environment state, count
/// vector within the per-species caps), lexicographic by environment first,
/// counts last axis fastest, followed by one absorbing overflow cell that
/// receives every transition leaving the box. Keeping the lost mass explicit
/// makes truncation error observable instead of silently biased.
struct JointSpace {
  std::vector<int> caps;
  int env_count = 0;
  long lattice = 0;  // product of (cap_i + 1)

  long size() const { return env_count * lattice + 1; }
  long overflow() const { return env_count * lattice; }
  long index(int x, const Counts& z) const;
  std::pair<int, Counts> unpack(long idx) const;
};

struct JointGenerator {
  JointSpace space;
  /// Column-oriented rates: qt(i, j) is the rate from state j into state i,
  /// so the master equation reads p' = qt p. Diagonal entries close each
  /// column to zero.
  Eigen::SparseMatrix<double> qt;
  /// Per boxed state, the rate redirected into the overflow cell.
  Eigen::VectorXd overflow_rates;
};

JointGenerator build_joint_generator(const ModulatedNetwork& net, const std::vector<int>& caps);

struct TransientPmf {
  JointSpace space;
  Eigen::VectorXd p;  // over boxed states, excluding overflow
  double overflow = 0.0;

  /// Marginal over the counts lattice (summed over environment states).
  Eigen::VectorXd count_marginal() const;
  /// Marginal over environment states.
  Eigen::VectorXd env_marginal() const;
};

/// p(t) by uniformization of the joint chain; the neglected Poisson tail
/// carries less than 1e-10 mass.
TransientPmf transient_pmf(const JointGenerator& gen, int x0, const Counts& z0, double t);

struct StationaryPmf {
  JointSpace space;
  Eigen::VectorXd p;          // over boxed states; sums to 1
  double overflow_flux = 0.0;  // probability flux into the overflow cell at stationarity
  double residual = 0.0;       // ||Q^T p||_inf of the censored solve

  Eigen::VectorXd count_marginal() const;
  Eigen::VectorXd env_marginal() const;
  /// Conditional pmf of the counts given environment state x.
  Eigen::VectorXd conditional(int x) const;
};

/// Stationary solve on the censored (reflected) box; transitions that would
/// leave the box are suppressed, and the flux they would carry under the
/// solved distribution is reported as the truncation diagnostic. Throws
/// NumericError when that flux exceeds `overflow_tol`.
StationaryPmf stationary_pmf(const JointGenerator& gen, double overflow_tol = 1e-6);

/// Default per-species caps, ceil(mean + 10 sd) from a pilot batch of exact
/// joint runs evaluated at time t.
std::vector<int> pilot_caps(const ModulatedNetwork& net, int x0, const Counts& z0, double t,
                            std::uint64_t seed, long pilot_replicas = 256);

}  // namespace envnet
