#include "envnet/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "envnet/errors.hpp"

namespace envnet {

long JointSpace::index(int x, const Counts& z) const {
  long flat = 0;
  for (int i = 0; i < z.size(); ++i) {
    if (z(i) < 0 || z(i) > caps[static_cast<std::size_t>(i)])
      throw PreconditionError("JointSpace: counts outside the box");
    flat = flat * (caps[static_cast<std::size_t>(i)] + 1) + z(i);
  }
  return static_cast<long>(x) * lattice + flat;
}

std::pair<int, Counts> JointSpace::unpack(long idx) const {
  const int d = static_cast<int>(caps.size());
  int x = static_cast<int>(idx / lattice);
  long flat = idx % lattice;
  Counts z = Counts::Zero(d);
  for (int i = d - 1; i >= 0; --i) {
    z(i) = static_cast<int>(flat % (caps[static_cast<std::size_t>(i)] + 1));
    flat /= caps[static_cast<std::size_t>(i)] + 1;
  }
  return {x, z};
}

JointGenerator build_joint_generator(const ModulatedNetwork& net, const std::vector<int>& caps) {
  const int d = net.species_count();
  const int m = net.env_count();
  if (static_cast<int>(caps.size()) != d) throw PreconditionError("build_joint_generator: caps size");

  JointGenerator gen;
  gen.space.caps = caps;
  gen.space.env_count = m;
  gen.space.lattice = 1;
  for (int c : caps) {
    if (c < 0) throw PreconditionError("build_joint_generator: negative cap");
    gen.space.lattice *= c + 1;
  }
  const long n = gen.space.size();
  gen.overflow_rates = Eigen::VectorXd::Zero(n - 1);

  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> diag(static_cast<std::size_t>(n), 0.0);
  auto add = [&](long from, long to, double rate) {
    if (rate <= 0.0) return;
    trip.emplace_back(static_cast<int>(to), static_cast<int>(from), rate);
    diag[static_cast<std::size_t>(from)] -= rate;
    if (to == gen.space.overflow()) gen.overflow_rates(from) += rate;
  };

  for (long idx = 0; idx < n - 1; ++idx) {
    auto [x, z] = gen.space.unpack(idx);
    for (int y = 0; y < m; ++y)
      if (y != x) add(idx, gen.space.index(y, z), net.env.generator(x, y));
    for (const auto& r : net.reactions) {
      const double rate = r.rate[x];
      switch (r.kind) {
        case ReactionKind::Production: {
          if (z(r.target) + r.burst > caps[static_cast<std::size_t>(r.target)]) {
            add(idx, gen.space.overflow(), rate);
          } else {
            Counts nz = z;
            nz(r.target) += r.burst;
            add(idx, gen.space.index(x, nz), rate);
          }
          break;
        }
        case ReactionKind::Conversion: {
          if (z(r.source) == 0) break;
          const double total = rate * z(r.source);
          if (z(r.target) + 1 > caps[static_cast<std::size_t>(r.target)]) {
            add(idx, gen.space.overflow(), total);
          } else {
            Counts nz = z;
            nz(r.source) -= 1;
            nz(r.target) += 1;
            add(idx, gen.space.index(x, nz), total);
          }
          break;
        }
        case ReactionKind::Degradation: {
          if (z(r.source) == 0) break;
          Counts nz = z;
          nz(r.source) -= 1;
          add(idx, gen.space.index(x, nz), rate * z(r.source));
          break;
        }
      }
    }
  }
  for (long i = 0; i < n; ++i)
    if (diag[static_cast<std::size_t>(i)] != 0.0)
      trip.emplace_back(static_cast<int>(i), static_cast<int>(i), diag[static_cast<std::size_t>(i)]);

  gen.qt.resize(static_cast<int>(n), static_cast<int>(n));
  gen.qt.setFromTriplets(trip.begin(), trip.end());
  gen.qt.makeCompressed();
  return gen;
}

Eigen::VectorXd TransientPmf::count_marginal() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.lattice);
  for (int x = 0; x < space.env_count; ++x) out += p.segment(static_cast<long>(x) * space.lattice, space.lattice);
  return out;
}

Eigen::VectorXd TransientPmf::env_marginal() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.env_count);
  for (int x = 0; x < space.env_count; ++x)
    out(x) = p.segment(static_cast<long>(x) * space.lattice, space.lattice).sum();
  return out;
}

TransientPmf transient_pmf(const JointGenerator& gen, int x0, const Counts& z0, double t) {
  if (t < 0.0) throw PreconditionError("transient_pmf: negative time");
  const long n = gen.space.size();
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  p(gen.space.index(x0, z0)) = 1.0;

  if (t > 0.0) {
    double lambda = 0.0;
    for (long i = 0; i < n; ++i) lambda = std::max(lambda, -gen.qt.coeff(static_cast<int>(i), static_cast<int>(i)));
    if (lambda > 0.0) {
      Eigen::SparseMatrix<double> pt = gen.qt;
      pt *= 1.0 / lambda;
      for (long i = 0; i < n; ++i) pt.coeffRef(static_cast<int>(i), static_cast<int>(i)) += 1.0;
      const double rate_t = lambda * t;
      double weight = std::exp(-rate_t);
      Eigen::VectorXd term = p;
      Eigen::VectorXd acc = weight * term;
      double cumulative = weight;
      // Tail mass below 1e-10; weights by recurrence, underflow handled by
      // the log-space restart below.
      long k = 0;
      const long hard_cap = static_cast<long>(rate_t + 80.0 * std::sqrt(rate_t + 1.0)) + 64;
      if (weight == 0.0) {
        // Large rate_t: accumulate weights in log space from the mode.
        acc.setZero();
        cumulative = 0.0;
        for (k = 1; k <= hard_cap; ++k) {
          term = pt * term;
          double logw = k * std::log(rate_t) - rate_t - std::lgamma(static_cast<double>(k) + 1.0);
          double w = std::exp(logw);
          if (w > 0.0) {
            acc += w * term;
            cumulative += w;
          }
          if (cumulative > 0.0 && 1.0 - cumulative < 1e-10 && k >= rate_t) break;
        }
      } else {
        for (k = 1; k <= hard_cap; ++k) {
          term = pt * term;
          weight *= rate_t / static_cast<double>(k);
          acc += weight * term;
          cumulative += weight;
          if (1.0 - cumulative < 1e-10 && k >= rate_t) break;
        }
      }
      if (1.0 - cumulative >= 1e-9)
        throw NumericError("transient_pmf: uniformization series did not close");
      p = acc;
    }
  }

  TransientPmf out;
  out.space = gen.space;
  out.p = p.head(n - 1);
  out.overflow = p(n - 1);
  return out;
}

Eigen::VectorXd StationaryPmf::count_marginal() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.lattice);
  for (int x = 0; x < space.env_count; ++x) out += p.segment(static_cast<long>(x) * space.lattice, space.lattice);
  return out;
}

Eigen::VectorXd StationaryPmf::env_marginal() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.env_count);
  for (int x = 0; x < space.env_count; ++x)
    out(x) = p.segment(static_cast<long>(x) * space.lattice, space.lattice).sum();
  return out;
}

Eigen::VectorXd StationaryPmf::conditional(int x) const {
  Eigen::VectorXd slice = p.segment(static_cast<long>(x) * space.lattice, space.lattice);
  double mass = slice.sum();
  if (mass <= 0.0) throw NumericError("stationary_pmf: environment state carries no mass");
  return slice / mass;
}

StationaryPmf stationary_pmf(const JointGenerator& gen, double overflow_tol) {
  const long n = gen.space.size() - 1;  // censored: overflow removed
  // Censoring suppresses the overflow transitions, so every column of the
  // boxed generator closes to zero again.
  Eigen::MatrixXd dense;
  const bool use_dense = n < 5000;

  StationaryPmf out;
  out.space = gen.space;
  if (use_dense) {
    dense = Eigen::MatrixXd(gen.qt.topLeftCorner(n, n));
    for (long j = 0; j < n; ++j) dense(j, j) += gen.overflow_rates(j);
    Eigen::MatrixXd a = dense;
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible())
      throw NumericError("stationary_pmf: censored generator is singular (box not irreducible)");
    out.p = lu.solve(b);
    out.p = out.p.cwiseMax(0.0);
    out.p /= out.p.sum();
    out.residual = (dense * out.p).cwiseAbs().maxCoeff();
  } else {
    Eigen::SparseMatrix<double> qc = gen.qt.topLeftCorner(n, n);
    Eigen::VectorXd diag_fix = gen.overflow_rates;
    double lambda = 0.0;
    for (long i = 0; i < n; ++i)
      lambda = std::max(lambda, -(qc.coeff(static_cast<int>(i), static_cast<int>(i)) + diag_fix(i)));
    Eigen::VectorXd p = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    Eigen::VectorXd next(n);
    double residual = 1.0;
    for (long it = 0; it < 2'000'000 && residual > 1e-9; ++it) {
      next = qc * p + diag_fix.cwiseProduct(p);
      residual = next.cwiseAbs().maxCoeff();
      p += next / lambda;  // one uniformized power step
      p = p.cwiseMax(0.0);
      p /= p.sum();
    }
    if (residual > 1e-9) throw NumericError("stationary_pmf: power iteration did not converge");
    out.p = p;
    out.residual = residual;
  }

  out.overflow_flux = gen.overflow_rates.dot(out.p);
  if (out.overflow_flux > overflow_tol)
    throw NumericError("stationary_pmf: truncation flux " + std::to_string(out.overflow_flux) +
                       " exceeds tolerance (enlarge the caps)");
  return out;
}

std::vector<int> pilot_caps(const ModulatedNetwork& net, int x0, const Counts& z0, double t,
                            std::uint64_t seed, long pilot_replicas) {
  const int d = net.species_count();
  auto ends = ssa_endpoints(net.raw(), x0, z0, t, seed, pilot_replicas);
  std::vector<int> caps(static_cast<std::size_t>(d), 0);
  int max_burst = 1;
  for (const auto& r : net.reactions)
    if (r.kind == ReactionKind::Production) max_burst = std::max(max_burst, r.burst);
  for (int i = 0; i < d; ++i) {
    double mean = 0.0, sq = 0.0;
    for (const auto& z : ends) {
      mean += z(i);
      sq += static_cast<double>(z(i)) * z(i);
    }
    mean /= static_cast<double>(pilot_replicas);
    double sd = std::sqrt(std::max(sq / static_cast<double>(pilot_replicas) - mean * mean, 0.0));
    caps[static_cast<std::size_t>(i)] =
        std::max({static_cast<int>(std::ceil(mean + 10.0 * sd)) + max_burst, z0(i) + max_burst, 6});
  }
  return caps;
}

}  // namespace envnet
