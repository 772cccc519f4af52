#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace envnet {

/// Counter-based random stream (splitmix64 output function). Streams are
/// addressed by (seed, stream id), so replicas can draw independently and the
/// whole run is reproducible regardless of scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(mix(mix(seed) + mix(stream ^ 0x5bf0'3635'dde9'4933ULL))) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform on (0, 1]; never returns 0 so log() is safe.
  double uniform() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  /// Uniform on [a, b).
  double uniform(double a, double b) { return a + (b - a) * (uniform() - 0x1.0p-53); }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  /// Index i with probability weights[i] / total. Caller guarantees total > 0
  /// and total == sum(weights) up to roundoff.
  int categorical(std::span<const double> weights, double total) {
    double u = uniform() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      u -= weights[i];
      if (u <= 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  long poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
      // Multiplicative inversion.
      const double limit = std::exp(-mean);
      double prod = uniform();
      long k = 0;
      while (prod > limit) {
        prod *= uniform();
        ++k;
      }
      return k;
    }
    return poisson_ptrs(mean);
  }

  /// Exact Bernoulli-sum binomial; counts here are desk scale.
  long binomial(long n, double p) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    long k = 0;
    for (long i = 0; i < n; ++i)
      if (uniform() <= p) ++k;
    return k;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Hoermann's PTRS transformed-rejection sampler for large means.
  long poisson_ptrs(double mean) {
    const double log_mean = std::log(mean);
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::abs(u);
      const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<long>(k);
      if (k < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
          k * log_mean - mean - std::lgamma(k + 1.0))
        return static_cast<long>(k);
    }
  }

  std::uint64_t state_;
};

}  // namespace envnet
