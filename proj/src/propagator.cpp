#include "envnet/propagator.hpp"

#include <cmath>

#include "envnet/errors.hpp"

namespace envnet {

namespace {

constexpr double kTailMass = 1e-13;
constexpr double kSeriesBudget = 32.0;  // max lambda*h handled by one series
constexpr int kMaxTerms = 256;

// Uniformized series for e^{Mh} with lambda*h <= kSeriesBudget.
Eigen::MatrixXd expm_series(const Eigen::MatrixXd& p, double rate_h) {
  const auto n = p.rows();
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  double weight = std::exp(-rate_h);
  Eigen::MatrixXd acc = weight * term;
  double cumulative = weight;
  for (int k = 1; k <= kMaxTerms; ++k) {
    term = p * term;
    weight *= rate_h / k;
    acc += weight * term;
    cumulative += weight;
    if (1.0 - cumulative < kTailMass && k >= rate_h) break;
  }
  return acc;
}

}  // namespace

Eigen::MatrixXd expm_metzler(const Eigen::MatrixXd& m, double h) {
  const auto n = m.rows();
  if (h < 0.0) throw PreconditionError("expm_metzler: negative time step");
  if (h == 0.0 || m.cwiseAbs().maxCoeff() == 0.0) return Eigen::MatrixXd::Identity(n, n);

  double lambda = std::max(m.diagonal().cwiseAbs().maxCoeff(), 1.0 / h);
  int squarings = 0;
  double base_h = h;
  while (lambda * base_h > kSeriesBudget && squarings < 64) {
    base_h *= 0.5;
    ++squarings;
  }
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n) + m / lambda;
  Eigen::MatrixXd e = expm_series(p, lambda * base_h);
  for (int s = 0; s < squarings; ++s) e = e * e;
  return e;
}

Eigen::VectorXd expm_apply(const Eigen::MatrixXd& m, double h, const Eigen::VectorXd& v) {
  if (h < 0.0) throw PreconditionError("expm_apply: negative time step");
  if (h == 0.0 || m.cwiseAbs().maxCoeff() == 0.0) return v;
  double lambda = std::max(m.diagonal().cwiseAbs().maxCoeff(), 1.0 / h);
  if (lambda * h > kSeriesBudget) return expm_metzler(m, h) * v;
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(m.rows(), m.cols()) + m / lambda;
  const double rate_h = lambda * h;
  Eigen::VectorXd term = v;
  double weight = std::exp(-rate_h);
  Eigen::VectorXd acc = weight * term;
  double cumulative = weight;
  for (int k = 1; k <= kMaxTerms; ++k) {
    term = p * term;
    weight *= rate_h / k;
    acc += weight * term;
    cumulative += weight;
    if (1.0 - cumulative < kTailMass && k >= rate_h) break;
  }
  return acc;
}

SegmentPropagator segment_propagator(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double h) {
  const auto d = a.rows();
  // Augmented block [[A, B], [0, 0]]; its exponential carries e^{Ah} in the
  // top-left block and int_0^h e^{Au} B du in the top-right column.
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(d + 1, d + 1);
  aug.topLeftCorner(d, d) = a;
  aug.topRightCorner(d, 1) = b;
  Eigen::MatrixXd e = expm_metzler(aug, h);
  SegmentPropagator out;
  out.E = e.topLeftCorner(d, d);
  out.g = e.topRightCorner(d, 1);
  return out;
}

PathPropagator propagate(const Modulation& mod, const EnvPath& path, double u, double t) {
  if (u < 0.0 || t > path.total_time || u > t)
    throw PreconditionError("propagate: span outside path");
  const int d = mod.dim();
  PathPropagator out;
  out.from = u;
  out.to = t;
  if (u == t) {
    out.phi = Eigen::MatrixXd::Identity(d, d);
    out.w = Eigen::VectorXd::Zero(d);
    return out;
  }
  const int first = path.segment_index(u);
  // Use the segment that *ends* at t when t sits exactly on a jump time.
  int last = path.segment_index(t);
  if (last > first && path.segment_start(last) == t) --last;

  auto piece = [&](int k, double a, double b) {
    return segment_propagator(mod, path.segments[static_cast<std::size_t>(k)].state, b - a);
  };

  if (first == last) {
    SegmentPropagator sp = piece(first, u, t);
    out.phi = std::move(sp.E);
    out.w = std::move(sp.g);
    return out;
  }
  SegmentPropagator sp = piece(first, u, path.segment_end(first));
  out.phi = std::move(sp.E);
  out.w = std::move(sp.g);
  for (int k = first + 1; k < last; ++k) {
    SegmentPropagator mid = piece(k, path.segment_start(k), path.segment_end(k));
    out.phi = mid.E * out.phi;
    out.w = mid.E * out.w + mid.g;
  }
  SegmentPropagator tail = piece(last, path.segment_start(last), t);
  out.phi = tail.E * out.phi;
  out.w = tail.E * out.w + tail.g;
  return out;
}

CycleBlocks cycle_blocks(const Modulation& mod, const EnvPath& path, const ReturnIndex& ret, int count) {
  if (count < 0 || count + 1 > static_cast<int>(ret.taus.size()))
    throw PreconditionError("cycle_blocks: not enough return times");
  CycleBlocks out;
  out.C.reserve(static_cast<std::size_t>(count));
  out.D.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    PathPropagator pp = propagate(mod, path, ret.taus[static_cast<std::size_t>(k)],
                                  ret.taus[static_cast<std::size_t>(k) + 1]);
    out.C.push_back(std::move(pp.phi));
    out.D.push_back(std::move(pp.w));
  }
  return out;
}

PathKernel::PathKernel(const Modulation& mod, const EnvPath& path, double t)
    : mod_(mod), path_(path), t_(t) {
  if (t < 0.0 || t > path.total_time) throw PreconditionError("PathKernel: time outside path");
  const int d = mod.dim();
  last_segment_ = t > 0.0 ? path.segment_index(t) : 0;
  if (last_segment_ > 0 && path.segment_start(last_segment_) == t) --last_segment_;
  suffix_.assign(static_cast<std::size_t>(last_segment_) + 1, Eigen::MatrixXd());
  // suffix_[k] = Phi(end of segment k clipped at t, t), built right to left.
  suffix_[static_cast<std::size_t>(last_segment_)] = Eigen::MatrixXd::Identity(d, d);
  for (int k = last_segment_ - 1; k >= 0; --k) {
    int next = k + 1;
    double a = path_.segment_start(next);
    double b = std::min(path_.segment_end(next), t_);
    SegmentPropagator sp = segment_propagator(mod_, path_.segments[static_cast<std::size_t>(next)].state, b - a);
    suffix_[static_cast<std::size_t>(k)] = suffix_[static_cast<std::size_t>(next)] * sp.E;
  }
  full_ = t > 0.0 ? propagate(mod_, path_, 0.0, t_)
                  : PathPropagator{Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d), 0.0, 0.0};
}

Eigen::MatrixXd PathKernel::phi_from(double u) const {
  if (u < 0.0 || u > t_) throw PreconditionError("PathKernel: query outside [0, t]");
  if (u == t_) return Eigen::MatrixXd::Identity(mod_.dim(), mod_.dim());
  int k = path_.segment_index(u);
  if (k > last_segment_) k = last_segment_;
  double end = std::min(path_.segment_end(k), t_);
  const auto& a = mod_.A[static_cast<std::size_t>(path_.segments[static_cast<std::size_t>(k)].state)];
  return suffix_[static_cast<std::size_t>(k)] * expm_metzler(a, end - u);
}

Eigen::VectorXd PathKernel::phi_column(double u, int j) const {
  if (u < 0.0 || u > t_) throw PreconditionError("PathKernel: query outside [0, t]");
  const int d = mod_.dim();
  Eigen::VectorXd v = Eigen::VectorXd::Unit(d, j);
  if (u == t_) return v;
  int k = path_.segment_index(u);
  if (k > last_segment_) k = last_segment_;
  double end = std::min(path_.segment_end(k), t_);
  const auto& a = mod_.A[static_cast<std::size_t>(path_.segments[static_cast<std::size_t>(k)].state)];
  return suffix_[static_cast<std::size_t>(k)] * expm_apply(a, end - u, v);
}

}  // namespace envnet
