#pragma once

#include <cmath>
#include <cstdint>

namespace bimeixner {

// Counter-based random stream (Philox2x64-10).
//
// The generator is a keyed bijection of a 128-bit counter, so a stream is
// fully determined by (seed, stream_id) and the number of draws made.
// Simulations derive one stream per path from a single master seed; results
// are then independent of how paths are distributed over worker threads.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(seed), ctr_hi_(stream_id), ctr_lo_(0) {}

  std::uint64_t next_u64() {
    std::uint64_t x0 = ctr_hi_;
    std::uint64_t x1 = ctr_lo_++;
    std::uint64_t k = key_;
    for (int round = 0; round < 10; ++round) {
      const unsigned __int128 prod =
          static_cast<unsigned __int128>(kMultiplier) * x0;
      const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
      const std::uint64_t lo = static_cast<std::uint64_t>(prod);
      x0 = hi ^ k ^ x1;
      x1 = lo;
      k += kWeyl;
    }
    return x0;
  }

  // Uniform on the open interval (0,1); never returns an endpoint.
  double next_uniform() {
    const std::uint64_t bits = next_u64() >> 11;  // 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  double next_normal() {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  double next_exponential() { return -std::log(next_uniform()); }

  // Marsaglia-Tsang; exact for any shape > 0.
  double next_gamma(double shape, double rate) {
    if (shape < 1.0) {
      const double g = next_gamma(shape + 1.0, 1.0);
      const double u = next_uniform();
      return g * std::pow(u, 1.0 / shape) / rate;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = next_normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = next_uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  double next_beta(double a, double b) {
    const double g1 = next_gamma(a, 1.0);
    const double g2 = next_gamma(b, 1.0);
    return g1 / (g1 + g2);
  }

  std::int64_t next_poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 10.0) {
      // inversion by multiplication
      const double limit = std::exp(-mean);
      double prod = next_uniform();
      std::int64_t k = 0;
      while (prod > limit) {
        prod *= next_uniform();
        ++k;
      }
      return k;
    }
    return poisson_ptrs(mean);
  }

 private:
  // Hoermann's transformed rejection (PTRS), exact for mean >= 10.
  std::int64_t poisson_ptrs(double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = next_uniform() - 0.5;
      const double v = next_uniform();
      const double us = 0.5 - std::abs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      const double k = kf;
      if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
          k * loglam - mean - std::lgamma(k + 1.0)) {
        return static_cast<std::int64_t>(kf);
      }
    }
  }

  static constexpr std::uint64_t kMultiplier = 0xD2B74407B1CE6E93ULL;
  static constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ULL;

  std::uint64_t key_;
  std::uint64_t ctr_hi_;
  std::uint64_t ctr_lo_;
};

}  // namespace bimeixner
