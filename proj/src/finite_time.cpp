#include "envnet/finite_time.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "envnet/errors.hpp"
#include "envnet/parallel.hpp"

namespace envnet {

namespace {

constexpr long kConfigCap = 100'000;

double binom(long n, long k) {
  if (k < 0 || k > n) return 0.0;
  return std::exp(std::lgamma(static_cast<double>(n) + 1.0) -
                  std::lgamma(static_cast<double>(k) + 1.0) -
                  std::lgamma(static_cast<double>(n - k) + 1.0));
}

// 16-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr std::array<double, 8> kGlNodes = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
constexpr std::array<double, 8> kGlWeights = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

template <typename F>
Eigen::VectorXd gl16(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  Eigen::VectorXd acc;
  for (int i = 0; i < 8; ++i) {
    Eigen::VectorXd lo = f(mid - half * kGlNodes[static_cast<std::size_t>(i)]);
    Eigen::VectorXd hi = f(mid + half * kGlNodes[static_cast<std::size_t>(i)]);
    Eigen::VectorXd term = kGlWeights[static_cast<std::size_t>(i)] * (lo + hi);
    acc = i == 0 ? term : Eigen::VectorXd(acc + term);
  }
  return half * acc;
}

// Adaptive bisection on [a, b] with a per-interval absolute budget.
template <typename F>
Eigen::VectorXd integrate_adaptive(const F& f, double a, double b, double abs_tol, int depth,
                                   int max_depth) {
  Eigen::VectorXd whole = gl16(f, a, b);
  double mid = 0.5 * (a + b);
  Eigen::VectorXd left = gl16(f, a, mid);
  Eigen::VectorXd right = gl16(f, mid, b);
  Eigen::VectorXd refined = left + right;
  if ((whole - refined).cwiseAbs().maxCoeff() <= abs_tol) return refined;
  if (depth >= max_depth)
    throw NumericError("burst_intensities: quadrature depth cap exceeded");
  return integrate_adaptive(f, a, mid, 0.5 * abs_tol, depth + 1, max_depth) +
         integrate_adaptive(f, mid, b, 0.5 * abs_tol, depth + 1, max_depth);
}

Counts multinomial_draw(RngStream& rng, long n, const Eigen::VectorXd& p) {
  const int d = static_cast<int>(p.size());
  Counts out = Counts::Zero(d);
  double remaining = 1.0;
  long left = n;
  for (int i = 0; i < d && left > 0; ++i) {
    double q = remaining > 0.0 ? std::min(p(i) / remaining, 1.0) : 0.0;
    long k = rng.binomial(left, q);
    out(i) = static_cast<int>(k);
    left -= k;
    remaining -= p(i);
  }
  return out;
}

}  // namespace

std::vector<Counts> configurations(int m, int d) {
  if (m < 0 || d < 1) throw PreconditionError("configurations: bad arguments");
  double count = binom(m + d, d);
  if (count > static_cast<double>(kConfigCap))
    throw NumericError("configurations: burst size " + std::to_string(m) + " with " +
                       std::to_string(d) + " species exceeds the configuration cap");
  std::vector<Counts> out;
  Counts nu = Counts::Zero(d);
  // Odometer enumeration of all vectors with sum <= m, skipping the zero one.
  for (;;) {
    if (nu.sum() >= 1) out.push_back(nu);
    int i = d - 1;
    while (i >= 0) {
      nu(i) += 1;
      if (nu.sum() <= m) break;
      nu(i) = 0;
      --i;
    }
    if (i < 0) break;
  }
  return out;
}

double g_config(const Eigen::VectorXd& p, const Counts& nu, int m) {
  const int d = static_cast<int>(p.size());
  long total = 0;
  double log_pmf = std::lgamma(static_cast<double>(m) + 1.0);
  double death = 1.0 - p.sum();
  if (death < 0.0) death = 0.0;  // roundoff guard; column sums stay <= 1 + 1e-12
  for (int i = 0; i < d; ++i) {
    const long k = nu(i);
    total += k;
    if (k == 0) continue;
    if (p(i) <= 0.0) return 0.0;
    log_pmf += k * std::log(p(i)) - std::lgamma(static_cast<double>(k) + 1.0);
  }
  if (total > m) return 0.0;
  const long dead = m - total;
  if (dead > 0) {
    if (death <= 0.0) return 0.0;
    log_pmf += dead * std::log(death) - std::lgamma(static_cast<double>(dead) + 1.0);
  }
  return std::exp(log_pmf);
}

BurstLaw burst_intensities(const ModulatedNetwork& net, const EnvPath& path, double t,
                           const QuadratureOptions& opts) {
  if (t < 0.0 || t > path.total_time) throw PreconditionError("burst_intensities: t outside path");
  const Modulation mod = build_modulation(net);
  const int d = net.species_count();

  int max_burst = 0;
  for (const auto& r : net.reactions)
    if (r.kind == ReactionKind::Production) max_burst = std::max(max_burst, r.burst);

  BurstLaw law;
  if (max_burst <= 1) {
    law.poisson_vector = true;
    law.W = t > 0.0 ? propagate(mod, path, 0.0, t).w : Eigen::VectorXd::Zero(d);
    return law;
  }

  PathKernel kernel(mod, path, t);
  for (const auto& r : net.reactions) {
    if (r.kind != ReactionKind::Production) continue;
    const int j = r.target;
    const auto nus = configurations(r.burst, d);
    const auto rows = static_cast<int>(nus.size());

    auto integrand = [&](double u) {
      Eigen::VectorXd p = kernel.phi_column(u, j);
      Eigen::VectorXd vals(rows);
      for (int q = 0; q < rows; ++q) vals(q) = g_config(p, nus[static_cast<std::size_t>(q)], r.burst);
      return vals;
    };

    Eigen::VectorXd total = Eigen::VectorXd::Zero(rows);
    if (t > 0.0) {
      // Coarse pass fixes the absolute budget; integrand is analytic between
      // jumps so per-segment refinement converges fast.
      double coarse_scale = 0.0;
      std::vector<std::pair<double, double>> spans;
      for (int k = 0; k <= path.segment_index(t); ++k) {
        double a = path.segment_start(k);
        double b = std::min(path.segment_end(k), t);
        if (b <= a) continue;
        double rate = r.rate[path.segments[static_cast<std::size_t>(k)].state];
        if (rate <= 0.0) continue;
        spans.emplace_back(a, b);
        coarse_scale = std::max(coarse_scale, rate * gl16(integrand, a, b).cwiseAbs().maxCoeff());
      }
      const double abs_tol = opts.rel_tol * std::max(coarse_scale, 1e-30);
      for (auto [a, b] : spans) {
        double rate = r.rate[path.state_at(a)];
        total += rate * integrate_adaptive(integrand, a, b, abs_tol, 0, opts.max_depth);
      }
    }
    for (int q = 0; q < rows; ++q)
      law.intensities.push_back({j, nus[static_cast<std::size_t>(q)], std::max(total(q), 0.0)});
  }
  return law;
}

std::vector<Counts> sample_finite_time(const ModulatedNetwork& net, const EnvPath& path, double t,
                                       const Counts& z0, std::uint64_t seed, long replicas) {
  if (t < 0.0 || t > path.total_time) throw PreconditionError("sample_finite_time: t outside path");
  if (z0.size() != net.species_count() || (z0.array() < 0).any())
    throw PreconditionError("sample_finite_time: bad initial counts");
  const Modulation mod = build_modulation(net);
  const int d = net.species_count();
  PathKernel kernel(mod, path, t);

  // Piecewise-constant birth densities: per channel, segment weights and the
  // total intensity of the homogeneous birth count.
  struct Channel {
    int target;
    int burst;
    std::vector<double> weights;  // per segment, rate * clipped length
    double total;
  };
  std::vector<Channel> channels;
  const int last_seg = t > 0.0 ? path.segment_index(t) : -1;
  for (const auto& r : net.reactions) {
    if (r.kind != ReactionKind::Production) continue;
    Channel ch{r.target, r.burst, {}, 0.0};
    for (int k = 0; k <= last_seg; ++k) {
      double len = std::min(path.segment_end(k), t) - path.segment_start(k);
      double w = len > 0.0 ? r.rate[path.segments[static_cast<std::size_t>(k)].state] * len : 0.0;
      ch.weights.push_back(w);
      ch.total += w;
    }
    channels.push_back(std::move(ch));
  }

  std::vector<Counts> out;
  out.reserve(static_cast<std::size_t>(replicas));
  for (long rep = 0; rep < replicas; ++rep) {
    RngStream rng(seed, static_cast<std::uint64_t>(rep));
    Counts z = Counts::Zero(d);
    for (int i = 0; i < d; ++i)
      if (z0(i) > 0) z += multinomial_draw(rng, z0(i), kernel.full().phi.col(i));
    for (const auto& ch : channels) {
      if (ch.total <= 0.0) continue;
      long births = rng.poisson(ch.total);
      for (long b = 0; b < births; ++b) {
        int k = rng.categorical(ch.weights, ch.total);
        double a = path.segment_start(k);
        double u = rng.uniform(a, std::min(path.segment_end(k), t));
        z += multinomial_draw(rng, ch.burst, kernel.phi_column(u, ch.target));
      }
    }
    out.push_back(std::move(z));
  }
  return out;
}

double PmfTable::at(const Counts& z) const {
  if (static_cast<std::size_t>(z.size()) != caps.size())
    throw PreconditionError("PmfTable: dimension mismatch");
  std::size_t idx = 0;
  for (int i = 0; i < z.size(); ++i) {
    if (z(i) < 0 || z(i) > caps[static_cast<std::size_t>(i)])
      throw NumericError("pmf: requested count exceeds the lattice cap");
    idx = idx * static_cast<std::size_t>(caps[static_cast<std::size_t>(i)] + 1) +
          static_cast<std::size_t>(z(i));
  }
  return values[idx];
}

namespace {

// Convolves `table` (over the capped box) with a sparse component given as
// (offset, weight) pairs; mass pushed outside the box is dropped.
void convolve_component(std::vector<double>& table, const std::vector<int>& caps,
                        const std::vector<std::pair<Counts, double>>& component) {
  const int d = static_cast<int>(caps.size());
  std::vector<std::size_t> strides(static_cast<std::size_t>(d), 1);
  for (int i = d - 2; i >= 0; --i)
    strides[static_cast<std::size_t>(i)] =
        strides[static_cast<std::size_t>(i) + 1] * static_cast<std::size_t>(caps[static_cast<std::size_t>(i) + 1] + 1);

  std::vector<double> next(table.size(), 0.0);
  Counts z = Counts::Zero(d);
  for (std::size_t idx = 0; idx < table.size(); ++idx) {
    double mass = table[idx];
    if (mass > 0.0) {
      for (const auto& [offset, weight] : component) {
        std::size_t target = 0;
        bool inside = true;
        for (int i = 0; i < d; ++i) {
          int zi = z(i) + offset(i);
          if (zi > caps[static_cast<std::size_t>(i)]) {
            inside = false;
            break;
          }
          target += static_cast<std::size_t>(zi) * strides[static_cast<std::size_t>(i)];
        }
        if (inside) next[target] += mass * weight;
      }
    }
    // odometer increment
    for (int i = d - 1; i >= 0; --i) {
      if (++z(i) <= caps[static_cast<std::size_t>(i)]) break;
      z(i) = 0;
    }
  }
  table.swap(next);
}

std::vector<std::pair<Counts, double>> multinomial_component(long n, const Eigen::VectorXd& p) {
  const int d = static_cast<int>(p.size());
  std::vector<std::pair<Counts, double>> out;
  Counts k = Counts::Zero(d);
  for (;;) {
    double w = g_config(p, k, static_cast<int>(n));
    if (w > 0.0) out.emplace_back(k, w);
    int i = d - 1;
    while (i >= 0) {
      k(i) += 1;
      if (k.sum() <= n) break;
      k(i) = 0;
      --i;
    }
    if (i < 0) break;
  }
  return out;
}

std::vector<std::pair<Counts, double>> poisson_component(const Counts& direction, double mean,
                                                         const std::vector<int>& caps) {
  // Steps k * direction while the displacement fits in the box.
  int kmax = 0;
  for (;;) {
    bool fits = true;
    for (int i = 0; i < direction.size(); ++i)
      if ((kmax + 1) * direction(i) > caps[static_cast<std::size_t>(i)]) fits = false;
    if (!fits) break;
    ++kmax;
  }
  std::vector<std::pair<Counts, double>> out;
  for (int k = 0; k <= kmax; ++k) {
    double log_w = k * std::log(mean) - mean - std::lgamma(static_cast<double>(k) + 1.0);
    out.emplace_back(Counts(k * direction), std::exp(log_w));
  }
  return out;
}

}  // namespace

PmfTable finite_time_pmf(const ModulatedNetwork& net, const EnvPath& path, double t, const Counts& z0,
                         const std::vector<int>& caps, const QuadratureOptions& opts) {
  const int d = net.species_count();
  if (static_cast<int>(caps.size()) != d) throw PreconditionError("finite_time_pmf: caps size");
  std::size_t size = 1;
  for (int c : caps) {
    if (c < 0) throw PreconditionError("finite_time_pmf: negative cap");
    size *= static_cast<std::size_t>(c) + 1;
  }

  PmfTable table;
  table.caps = caps;
  table.values.assign(size, 0.0);
  table.values[0] = 1.0;

  const Modulation mod = build_modulation(net);
  Eigen::MatrixXd phi = t > 0.0 ? propagate(mod, path, 0.0, t).phi
                                : Eigen::MatrixXd::Identity(d, d);
  for (int i = 0; i < d; ++i)
    if (z0(i) > 0) convolve_component(table.values, caps, multinomial_component(z0(i), phi.col(i)));

  BurstLaw law = burst_intensities(net, path, t, opts);
  if (law.poisson_vector) {
    for (int i = 0; i < d; ++i)
      if (law.W(i) > 0.0)
        convolve_component(table.values, caps, poisson_component(Counts::Unit(d, i), law.W(i), caps));
  } else {
    for (const auto& b : law.intensities)
      if (b.intensity > 0.0)
        convolve_component(table.values, caps, poisson_component(b.nu, b.intensity, caps));
  }
  table.covered = 0.0;
  for (double v : table.values) table.covered += v;
  return table;
}

double pmf_finite_time(const ModulatedNetwork& net, const EnvPath& path, double t, const Counts& z0,
                       const Counts& z, const std::vector<int>& caps, const QuadratureOptions& opts) {
  return finite_time_pmf(net, path, t, z0, caps, opts).at(z);
}

void ssa_scan(const RawModel& model, int x0, const Counts& z0, double horizon, std::uint64_t seed,
              long max_steps, const std::function<void(const JointEvent&)>& visit) {
  auto structural = structural_violations(model);
  if (!structural.empty()) throw ValidationError(std::move(structural));
  const int d = model.species_count();
  const int m = model.env_count();
  if (x0 < 0 || x0 >= m) throw PreconditionError("ssa: unknown initial environment state");
  if (z0.size() != d || (z0.array() < 0).any()) throw PreconditionError("ssa: bad initial counts");

  RngStream rng(seed);
  double t = 0.0;
  int x = x0;
  Counts z = z0;
  visit({0.0, x, z});

  const std::size_t reactions = model.reactions.size();
  std::vector<double> weights(reactions + static_cast<std::size_t>(m), 0.0);
  long steps = 0;
  for (;;) {
    double total = 0.0;
    for (std::size_t r = 0; r < reactions; ++r) {
      const auto& rxn = model.reactions[r];
      double rate = rxn.rates[static_cast<std::size_t>(x)];
      for (int i = 0; i < d && rate > 0.0; ++i)
        for (int c = 0; c < rxn.reactant[static_cast<std::size_t>(i)]; ++c) rate *= z(i) - c;
      weights[r] = std::max(rate, 0.0);
      total += weights[r];
    }
    for (int y = 0; y < m; ++y) {
      double rate = y == x ? 0.0 : model.generator(x, y);
      weights[reactions + static_cast<std::size_t>(y)] = rate;
      total += rate;
    }
    if (total <= 0.0) return;  // fully absorbed; state holds until the horizon
    t += rng.exponential(total);
    if (t > horizon) return;
    if (++steps > max_steps) throw NumericError("ssa: step budget exceeded (near-explosive model?)");
    std::size_t pick = static_cast<std::size_t>(rng.categorical(weights, total));
    if (pick < reactions) {
      const auto& rxn = model.reactions[pick];
      for (int i = 0; i < d; ++i)
        z(i) += rxn.product[static_cast<std::size_t>(i)] - rxn.reactant[static_cast<std::size_t>(i)];
    } else {
      x = static_cast<int>(pick - reactions);
    }
    visit({t, x, z});
  }
}

std::vector<JointEvent> ssa_joint(const RawModel& model, int x0, const Counts& z0, double horizon,
                                  std::uint64_t seed, long max_steps) {
  std::vector<JointEvent> out;
  ssa_scan(model, x0, z0, horizon, seed, max_steps, [&](const JointEvent& e) { out.push_back(e); });
  return out;
}

std::vector<Counts> ssa_endpoints(const RawModel& model, int x0, const Counts& z0, double horizon,
                                  std::uint64_t seed, long replicas, long max_steps, int threads) {
  std::vector<Counts> out(static_cast<std::size_t>(replicas));
  for_each_replica(replicas, threads, [&](long rep) {
    Counts last = z0;
    ssa_scan(model, x0, z0, horizon, RngStream(seed, static_cast<std::uint64_t>(rep)).next_u64(),
             max_steps, [&](const JointEvent& e) { last = e.counts; });
    out[static_cast<std::size_t>(rep)] = std::move(last);
  });
  return out;
}

}  // namespace envnet
