#include "envnet/stationary.hpp"

#include <algorithm>
#include <cmath>

#include "envnet/errors.hpp"
#include "envnet/parallel.hpp"
#include "envnet/propagator.hpp"

namespace envnet {

namespace {

struct SreContext {
  ModulatedNetwork net;  // singleton environments already duplicated
  Modulation mod;
  SpeciesPartition partition;
  int anchor;
};

SreContext make_context(const ModulatedNetwork& net, int anchor) {
  if (anchor < 0 || anchor >= net.env_count())
    throw PreconditionError("stationary: unknown anchor state");
  SreContext ctx;
  ctx.net = net.env_count() == 1 ? clone_network(net) : net;
  ctx.anchor = net.env_count() == 1 ? 0 : anchor;
  ctx.mod = build_modulation(ctx.net);

  Eigen::VectorXd pi = ctx.net.env.pi ? *ctx.net.env.pi : stationary_env(ctx.net.env);
  ErgodicityVerdict verdict = check_assumption2(ctx.net, pi);
  if (!verdict.satisfied)
    throw PreconditionError(
        "stationary: ergodicity assumption fails (a properly produced species is not properly degraded)");
  if (!verdict.partition.transient.empty())
    throw PreconditionError(
        "stationary: transient species present; drop them from the model (they vanish at stationarity)");
  ctx.partition = std::move(verdict.partition);
  return ctx;
}

MixtureAtom one_atom(const SreContext& ctx, int n, RngStream& rng, const SreOptions& opts) {
  const int d = ctx.net.species_count();
  auto [path, ret] = simulate_env_until_return(ctx.net.env, ctx.anchor, n, rng);

  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(d, d);
  bool converged = false;
  for (int k = 0; k < n; ++k) {
    PathPropagator pp = propagate(ctx.mod, path, ret.taus[static_cast<std::size_t>(k)],
                                  ret.taus[static_cast<std::size_t>(k) + 1]);
    v = pp.phi * v + pp.w;
    if (!converged) {
      Eigen::MatrixXd next = pp.phi * prod;
      if ((next - prod).cwiseAbs().maxCoeff() < opts.product_tol) {
        converged = true;
        // In the limit the columns belonging to one closed component agree.
        for (const auto& members : ctx.partition.closed_components) {
          for (std::size_t a = 1; a < members.size(); ++a) {
            double spread = (next.col(members[a]) - next.col(members[0])).cwiseAbs().maxCoeff();
            if (spread > opts.column_spread_tol)
              throw NumericError("sre_sample: converged matrix product has unequal columns within a closed component");
          }
        }
      }
      prod = std::move(next);
    }
  }

  MixtureAtom atom;
  atom.U = rng.exponential(ctx.net.env.exit_rate(ctx.anchor));
  SegmentPropagator hold = segment_propagator(ctx.mod, ctx.anchor, atom.U);
  atom.u_matrix = hold.E * prod;
  atom.w_vector = hold.E * v + hold.g;
  return atom;
}

}  // namespace

std::vector<MixtureAtom> sre_sample(const ModulatedNetwork& net, int anchor, int n,
                                    std::uint64_t seed, long replicas, const SreOptions& opts) {
  if (n < 0 || replicas < 1) throw PreconditionError("sre_sample: bad iteration/replica counts");
  SreContext ctx = make_context(net, anchor);
  std::vector<MixtureAtom> atoms(static_cast<std::size_t>(replicas));
  for_each_replica(replicas, opts.threads, [&](long r) {
    RngStream rng(seed, static_cast<std::uint64_t>(r));
    atoms[static_cast<std::size_t>(r)] = one_atom(ctx, n, rng, opts);
  });
  return atoms;
}

std::vector<Counts> stationary_sample(const ModulatedNetwork& net, int anchor,
                                      const std::vector<long>& component_totals, int n,
                                      std::uint64_t seed, long replicas, const SreOptions& opts) {
  for (const auto& r : net.reactions)
    if (r.kind == ReactionKind::Production && r.burst > 1)
      throw PreconditionError("stationary_sample: burst sizes must be 0 or 1");
  SreContext ctx = make_context(net, anchor);
  const int d = ctx.net.species_count();
  const auto& components = ctx.partition.closed_components;
  if (component_totals.size() != components.size())
    throw PreconditionError("stationary_sample: expected one conserved total per closed component");
  for (long t : component_totals)
    if (t < 0) throw PreconditionError("stationary_sample: negative conserved total");

  std::vector<Counts> out(static_cast<std::size_t>(replicas));
  for_each_replica(replicas, opts.threads, [&](long r) {
    RngStream rng(seed, static_cast<std::uint64_t>(r));
    MixtureAtom atom = one_atom(ctx, n, rng, opts);
    Counts z = Counts::Zero(d);
    for (int i = 0; i < d; ++i) {
      long k = rng.poisson(atom.w_vector(i));
      z(i) += static_cast<int>(k);
    }
    for (std::size_t c = 0; c < components.size(); ++c) {
      // Representative: smallest species index in the component.
      Eigen::VectorXd p = atom.u_matrix.col(components[c].front());
      double mass = p.sum();
      // A closed component conserves molecules; a sub-unit column sum at this
      // point is roundoff (within the documented 1e-12 budget), not death.
      if (mass > 0.0 && 1.0 - mass < 1e-12) p /= mass;
      long total = component_totals[c];
      double remaining = 1.0;
      long left = total;
      for (int i = 0; i < d && left > 0; ++i) {
        double q = remaining > 0.0 ? std::min(p(i) / remaining, 1.0) : 0.0;
        long k = rng.binomial(left, q);
        z(i) += static_cast<int>(k);
        left -= k;
        remaining -= p(i);
      }
    }
    out[static_cast<std::size_t>(r)] = std::move(z);
  });
  return out;
}

MomentTable factorial_moments(const ModulatedNetwork& net, const Eigen::VectorXd& pi, int q_max,
                              long cycles, std::uint64_t seed, int threads) {
  if (net.species_count() != 1)
    throw PreconditionError("factorial_moments: cycle recursion needs d = 1 (use factorial_moment_mc)");
  if (q_max < 0 || cycles < 32) throw PreconditionError("factorial_moments: need q_max >= 0, cycles >= 32");
  for (const auto& r : net.reactions)
    if (r.kind == ReactionKind::Production && r.burst > 1)
      throw PreconditionError("factorial_moments: burst sizes must be 0 or 1");

  SreContext ctx = make_context(net, 0);
  const int m = ctx.net.env_count();
  Eigen::VectorXd weights = net.env_count() == 1 ? Eigen::VectorXd::Constant(2, 0.5) : pi;
  if (weights.size() != m) throw PreconditionError("factorial_moments: weight vector size mismatch");

  constexpr int kBatches = 16;
  const long per_batch = cycles / kBatches;
  const std::size_t qn = static_cast<std::size_t>(q_max) + 1;
  // sums[x][b][i][j] accumulates C^i * Dtilde^j over the replicas of batch b.
  std::vector<std::vector<std::vector<std::vector<double>>>> sums(
      static_cast<std::size_t>(m),
      std::vector<std::vector<std::vector<double>>>(
          kBatches, std::vector<std::vector<double>>(qn, std::vector<double>(qn, 0.0))));

  for (int x = 0; x < m; ++x) {
    const double prod_rate = ctx.net.production_rate(0, x);
    const double deg_rate = ctx.net.degradation_rate(0, x);
    const double qx = ctx.net.env.exit_rate(x);
    for_each_replica(kBatches, threads, [&](long b) {
      RngStream rng(seed, (static_cast<std::uint64_t>(x) << 32) ^ static_cast<std::uint64_t>(b));
      auto& cell = sums[static_cast<std::size_t>(x)][static_cast<std::size_t>(b)];
      for (long rep = 0; rep < per_batch; ++rep) {
        auto [path, ret] = simulate_env_until_return(ctx.net.env, x, 1, rng);
        PathPropagator pp = propagate(ctx.mod, path, 0.0, ret.taus[1]);
        const double c = pp.phi(0, 0);
        const double dd = pp.w(0);
        const double u = rng.exponential(qx);
        const double decay = std::exp(-deg_rate * u);
        const double dtilde = deg_rate > 0.0
                                  ? (prod_rate / deg_rate) * (1.0 - c) * (1.0 - decay) + decay * dd
                                  : (1.0 - c) * u * prod_rate + dd;
        double cp = 1.0;
        for (std::size_t i = 0; i < qn; ++i) {
          double dp = 1.0;
          for (std::size_t j = 0; j < qn; ++j) {
            cell[i][j] += cp * dp;
            dp *= dtilde;
          }
          cp *= c;
        }
      }
    });
  }

  auto binomial_coeff = [](int nq, int k) {
    double v = 1.0;
    for (int i = 0; i < k; ++i) v = v * (nq - i) / (i + 1);
    return v;
  };

  // Cycle recursion per anchor from mean powers; `which` selects batch b or,
  // with -1, the pooled estimate.
  auto recursion = [&](int which) {
    std::vector<double> per_q(qn, 0.0);
    for (int x = 0; x < m; ++x) {
      std::vector<std::vector<double>> mean(qn, std::vector<double>(qn, 0.0));
      double count = 0.0;
      for (int b = 0; b < kBatches; ++b) {
        if (which >= 0 && b != which) continue;
        for (std::size_t i = 0; i < qn; ++i)
          for (std::size_t j = 0; j < qn; ++j)
            mean[i][j] += sums[static_cast<std::size_t>(x)][static_cast<std::size_t>(b)][i][j];
        count += static_cast<double>(per_batch);
      }
      for (std::size_t i = 0; i < qn; ++i)
        for (std::size_t j = 0; j < qn; ++j) mean[i][j] /= count;

      std::vector<double> mx(qn, 0.0);
      mx[0] = 1.0;
      for (int q = 1; q <= q_max; ++q) {
        const double denom = 1.0 - mean[static_cast<std::size_t>(q)][0];
        if (denom <= 0.0) throw NumericError("factorial_moments: E[C^q] estimate >= 1");
        double top = 0.0;
        for (int i = 0; i < q; ++i)
          top += binomial_coeff(q, i) * mean[static_cast<std::size_t>(i)][static_cast<std::size_t>(q - i)] *
                 mx[static_cast<std::size_t>(i)];
        mx[static_cast<std::size_t>(q)] = top / denom;
      }
      for (std::size_t q = 0; q < qn; ++q) per_q[q] += weights(x) * mx[q];
    }
    return per_q;
  };

  // Denominator stability: pooled E[C^q] must be < 1 with 99% confidence.
  for (int q = 1; q <= q_max; ++q) {
    for (int x = 0; x < m; ++x) {
      double meanc = 0.0;
      std::vector<double> batch_means;
      for (int b = 0; b < kBatches; ++b) {
        double bm = sums[static_cast<std::size_t>(x)][static_cast<std::size_t>(b)][static_cast<std::size_t>(q)][0] /
                    static_cast<double>(per_batch);
        batch_means.push_back(bm);
        meanc += bm;
      }
      meanc /= kBatches;
      double var = 0.0;
      for (double bm : batch_means) var += (bm - meanc) * (bm - meanc);
      var /= (kBatches - 1);
      if (meanc + 2.3263478740408408 * std::sqrt(var / kBatches) >= 1.0)
        throw NumericError("factorial_moments: upper confidence bound of E[C^q] reaches 1 (q = " +
                           std::to_string(q) + ")");
    }
  }

  MomentTable table;
  table.values = recursion(-1);
  std::vector<std::vector<double>> batch_tables;
  for (int b = 0; b < kBatches; ++b) batch_tables.push_back(recursion(b));
  table.ses.assign(qn, 0.0);
  for (std::size_t q = 1; q < qn; ++q) {
    double mean = 0.0;
    for (const auto& bt : batch_tables) mean += bt[q];
    mean /= kBatches;
    double var = 0.0;
    for (const auto& bt : batch_tables) var += (bt[q] - mean) * (bt[q] - mean);
    var /= (kBatches - 1);
    table.ses[q] = std::sqrt(var / kBatches);
  }
  return table;
}

std::pair<double, double> factorial_moment_mc(const ModulatedNetwork& net, int anchor,
                                              const Counts& q, int n, std::uint64_t seed,
                                              long replicas, const SreOptions& opts) {
  if (q.size() != net.species_count() || (q.array() < 0).any())
    throw PreconditionError("factorial_moment_mc: bad moment index");
  auto atoms = sre_sample(net, anchor, n, seed, replicas, opts);
  double mean = 0.0, sq = 0.0;
  for (const auto& atom : atoms) {
    double v = 1.0;
    for (int i = 0; i < q.size(); ++i)
      for (int k = 0; k < q(i); ++k) v *= atom.w_vector(i);
    mean += v;
    sq += v * v;
  }
  const double r = static_cast<double>(replicas);
  mean /= r;
  double var = std::max(sq / r - mean * mean, 0.0);
  return {mean, std::sqrt(var / r)};
}

int ErrorCertificate::iterations_for(double eps) const {
  if (!available || eps <= 0.0) throw PreconditionError("certificate unavailable");
  if (M_hat <= eps) return 1;
  return std::max(1, static_cast<int>(std::ceil((std::log(M_hat) - std::log(eps)) / r_hat)));
}

ErrorCertificate error_certificate(const ModulatedNetwork& net, int anchor, std::uint64_t seed,
                                   long replicas, int threads) {
  if (replicas < 100) throw PreconditionError("error_certificate: too few replicas");
  SreContext ctx = make_context(net, anchor);

  AlphaSearch alpha = estimate_alpha(net, anchor, 1, std::max(replicas / 4, 1000L), seed ^ 0x5eedULL,
                                     threads);
  if (!alpha.alpha.has_value() || *alpha.alpha != 1)
    throw NumericError("error_certificate: one-cycle contraction not confirmed (alpha > 1?); "
                       "sampler remains usable without a bound");

  std::vector<double> norms(static_cast<std::size_t>(replicas));
  for_each_replica(replicas, threads, [&](long r) {
    RngStream rng(seed, 0x00c0ffeeULL + static_cast<std::uint64_t>(r));
    auto [path, ret] = simulate_env_until_return(ctx.net.env, ctx.anchor, 1, rng);
    PathPropagator pp = propagate(ctx.mod, path, 0.0, ret.taus[1]);
    norms[static_cast<std::size_t>(r)] = pp.phi.cwiseAbs().colwise().sum().maxCoeff();
  });
  double c_mean = 0.0;
  for (double v : norms) c_mean += v;
  c_mean /= static_cast<double>(replicas);
  double var = 0.0;
  for (double v : norms) var += (v - c_mean) * (v - c_mean);
  var /= static_cast<double>(replicas - 1);

  ErrorCertificate cert;
  cert.c_mean = c_mean;
  cert.c_se = std::sqrt(var / static_cast<double>(replicas));
  if (c_mean >= 1.0) return cert;  // no positive rate, certificate unavailable
  cert.r_hat = -std::log(c_mean);

  const int n_ref = std::max(32, static_cast<int>(std::ceil(8.0 / cert.r_hat)));
  const long m_reps = std::min<long>(replicas, 4000);
  auto atoms = sre_sample(net, anchor, n_ref, seed ^ 0xabcdULL, m_reps, {threads});
  double m_hat = 0.0;
  for (const auto& atom : atoms) m_hat += atom.w_vector.cwiseAbs().sum();
  cert.M_hat = m_hat / static_cast<double>(m_reps);
  cert.available = cert.r_hat > 0.0;
  return cert;
}

}  // namespace envnet
