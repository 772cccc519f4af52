#pragma once

#include <Eigen/Dense>
#include <vector>

#include "envnet/env_path.hpp"
#include "envnet/model.hpp"

namespace envnet {

/// Matrix exponential e^{M h} for a Metzler matrix (nonnegative
/// off-diagonals) by uniformization: with lambda >= max |M_ii| and
/// P = I + M/lambda >= 0,  e^{Mh} = sum_n e^{-lambda h} (lambda h)^n / n! P^n,
/// truncated once the neglected Poisson tail mass is below 1e-13. Large
/// lambda*h is handled by halving h and squaring, which preserves
/// nonnegativity exactly. For a sub-generator transpose the result is
/// entrywise in [0, 1] with column sums <= 1 up to roundoff.
Eigen::MatrixXd expm_metzler(const Eigen::MatrixXd& m, double h);

/// e^{M h} v without forming the matrix (same series, applied to a vector).
Eigen::VectorXd expm_apply(const Eigen::MatrixXd& m, double h, const Eigen::VectorXd& v);

inline Eigen::MatrixXd expm_subgen(const Eigen::MatrixXd& a, double h) { return expm_metzler(a, h); }

/// Survival matrix and accumulated production over one constant-environment
/// stretch of length h:  E = e^{A(x) h},  g = int_0^h e^{A(x) u} B(x) du.
/// Both come out of a single (d+1)-dimensional augmented exponential.
struct SegmentPropagator {
  Eigen::MatrixXd E;
  Eigen::VectorXd g;
};

SegmentPropagator segment_propagator(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double h);
inline SegmentPropagator segment_propagator(const Modulation& mod, int x, double h) {
  return segment_propagator(mod.A[static_cast<std::size_t>(x)], mod.B[static_cast<std::size_t>(x)], h);
}

/// G_x(h) = int_0^h e^{A(x)u} B(x) du.
inline Eigen::VectorXd segment_production(const Modulation& mod, int x, double h) {
  return segment_propagator(mod, x, h).g;
}

/// phi = Phi(u, t) (ordered product of segment exponentials over [u, t]) and
/// w = int_u^t Phi(s, t) B_X(s) ds, accumulated with the composition rule
/// w_{[a,c]} = Phi(b,c) w_{[a,b]} + w_{[b,c]}. Phi is never inverted.
struct PathPropagator {
  Eigen::MatrixXd phi;
  Eigen::VectorXd w;
  double from = 0.0;
  double to = 0.0;
};

PathPropagator propagate(const Modulation& mod, const EnvPath& path, double u, double t);

inline PathPropagator compose(const PathPropagator& later, const PathPropagator& earlier) {
  return {later.phi * earlier.phi, later.phi * earlier.w + later.w, earlier.from, later.to};
}

/// Return-cycle blocks C_k = Phi(tau_k, tau_{k+1}), D_k = accumulated
/// production over the same span; i.i.d. across k by the strong Markov
/// property.
struct CycleBlocks {
  std::vector<Eigen::MatrixXd> C;
  std::vector<Eigen::VectorXd> D;
};

CycleBlocks cycle_blocks(const Modulation& mod, const EnvPath& path, const ReturnIndex& ret, int count);

/// Precomputed per-segment propagators and suffix products for one path and
/// one terminal time; answers Phi(u, t) e_j queries in a single partial
/// exponential. Read-only after construction.
class PathKernel {
 public:
  PathKernel(const Modulation& mod, const EnvPath& path, double t);

  double terminal_time() const { return t_; }
  const EnvPath& path() const { return path_; }
  const Modulation& modulation() const { return mod_; }

  /// Phi(u, t) for 0 <= u <= t.
  Eigen::MatrixXd phi_from(double u) const;
  /// Phi(u, t) e_j.
  Eigen::VectorXd phi_column(double u, int j) const;
  /// Full propagator over [0, t] (phi and w).
  const PathPropagator& full() const { return full_; }

 private:
  const Modulation& mod_;
  const EnvPath& path_;
  double t_;
  int last_segment_;
  std::vector<Eigen::MatrixXd> suffix_;  // suffix_[k] = Phi(end of segment k, t)
  PathPropagator full_;
};

}  // namespace envnet
