// Shared helpers for the test binaries: model builders, random model
// generation, independent numerical oracles, and distribution distances.
#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "envnet/envnet.hpp"

namespace testsupport {

using namespace envnet;

inline RawModel birth_death_two_state(double k1_lo, double k1_hi, double k2_lo, double k2_hi,
                                      double q01 = 1.0, double q10 = 1.0, int burst = 1) {
  std::string text = "[species]\nnames = S\n\n[environment]\nstates = lo hi\n";
  text += "row lo = " + std::to_string(-q01) + " " + std::to_string(q01) + "\n";
  text += "row hi = " + std::to_string(q10) + " " + std::to_string(-q10) + "\n\n[reactions]\n";
  text += "reaction = 0 -> " + (burst == 1 ? std::string("S") : std::to_string(burst) + " S") + " : " +
          std::to_string(k1_lo) + " " + std::to_string(k1_hi) + "\n";
  text += "reaction = S -> 0 : " + std::to_string(k2_lo) + " " + std::to_string(k2_hi) + "\n";
  return parse_model(text);
}

/// Random mono-molecular network over a random irreducible environment.
/// Not required to satisfy the ergodicity condition.
inline ModulatedNetwork random_network(RngStream& rng, int d_max = 6, int env_max = 8) {
  const int d = 1 + static_cast<int>(rng.next_u64() % static_cast<unsigned>(d_max));
  const int m = 2 + static_cast<int>(rng.next_u64() % static_cast<unsigned>(env_max - 1));

  RawModel raw;
  for (int i = 0; i < d; ++i) raw.species_names.push_back("S" + std::to_string(i + 1));
  for (int x = 0; x < m; ++x) raw.env_state_names.push_back("x" + std::to_string(x));
  raw.generator = Eigen::MatrixXd::Zero(m, m);
  for (int x = 0; x < m; ++x) {
    raw.generator(x, (x + 1) % m) += 0.2 + 2.0 * rng.uniform();  // ring keeps it irreducible
    for (int y = 0; y < m; ++y)
      if (y != x && rng.uniform() < 0.3) raw.generator(x, y) += 2.0 * rng.uniform();
    raw.generator(x, x) = 0.0;
    raw.generator(x, x) = -raw.generator.row(x).sum();
  }

  auto rates = [&](bool allow_zeros) {
    std::vector<double> r;
    bool any = false;
    for (int x = 0; x < m; ++x) {
      double v = (allow_zeros && rng.uniform() < 0.4) ? 0.0 : 3.0 * rng.uniform();
      any = any || v > 0.0;
      r.push_back(v);
    }
    if (!any) r[static_cast<std::size_t>(rng.next_u64() % static_cast<unsigned>(m))] = 1.0 + rng.uniform();
    return r;
  };
  auto add = [&](std::vector<int> reactant, std::vector<int> product) {
    RawReaction rxn;
    rxn.reactant = std::move(reactant);
    rxn.product = std::move(product);
    rxn.rates = rates(true);
    raw.reactions.push_back(std::move(rxn));
  };

  for (int i = 0; i < d; ++i) {
    std::vector<int> zero(static_cast<std::size_t>(d), 0);
    if (rng.uniform() < 0.6) {
      auto prod = zero;
      prod[static_cast<std::size_t>(i)] = 1 + static_cast<int>(rng.next_u64() % 3);
      add(zero, prod);
    }
    if (rng.uniform() < 0.7) {
      auto reac = zero;
      reac[static_cast<std::size_t>(i)] = 1;
      add(reac, zero);
    }
    int j = static_cast<int>(rng.next_u64() % static_cast<unsigned>(d));
    if (j != i && rng.uniform() < 0.6) {
      auto reac = zero, prod = zero;
      reac[static_cast<std::size_t>(i)] = 1;
      prod[static_cast<std::size_t>(j)] = 1;
      add(reac, prod);
    }
  }
  // Guarantee every species touches a reaction.
  for (int i = 0; i < d; ++i) {
    bool seen = false;
    for (const auto& rxn : raw.reactions)
      seen = seen || rxn.reactant[static_cast<std::size_t>(i)] > 0 || rxn.product[static_cast<std::size_t>(i)] > 0;
    if (!seen) {
      std::vector<int> zero(static_cast<std::size_t>(d), 0), reac = zero;
      reac[static_cast<std::size_t>(i)] = 1;
      add(reac, zero);
    }
  }
  return validate_network(raw);
}

/// Brute-force scalar quadrature, independent of the library's Gauss-Legendre
/// machinery: adaptive Simpson.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol,
                      int depth = 0) {
  const double m = 0.5 * (a + b);
  auto s = [&](double x0, double x1) {
    return (x1 - x0) / 6.0 * (f(x0) + 4.0 * f(0.5 * (x0 + x1)) + f(x1));
  };
  const double whole = s(a, b), left = s(a, m), right = s(m, b);
  if (std::abs(left + right - whole) < 15.0 * tol || depth > 40) return left + right;
  return simpson(f, a, m, 0.5 * tol, depth + 1) + simpson(f, m, b, 0.5 * tol, depth + 1);
}

inline double tv_distance(const std::map<std::vector<int>, double>& a,
                          const std::map<std::vector<int>, double>& b) {
  double tv = 0.0;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    tv += std::abs(v - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [k, v] : b)
    if (!a.count(k)) tv += v;
  return 0.5 * tv;
}

inline std::map<std::vector<int>, double> empirical(const std::vector<Counts>& samples) {
  std::map<std::vector<int>, double> out;
  const double n = static_cast<double>(samples.size());
  for (const auto& z : samples) {
    std::vector<int> key(z.data(), z.data() + z.size());
    out[key] += 1.0 / n;
  }
  return out;
}

///1-d empirical Wasserstein-1 distance between equally sized samples.
inline double wasserstein1(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

}  // namespace testsupport
