#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace fluxcs {

// SplitMix64; used to expand seeds and to mix stream identifiers.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

// Stable 64-bit combine for deriving per-stream seeds from (seed, index).
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  SplitMix64 sm(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)));
  sm.next();
  return sm.next() ^ b;
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix64(mix64(a, b), c);
}

// xoshiro256++ with explicit sampling algorithms so that every draw is
// reproducible across platforms and thread counts (std:: distributions are
// implementation-defined and would break byte-identical sweep output).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& word : state_) word = sm.next();
  }

  static Rng from_stream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix64(seed, stream));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    const std::uint64_t threshold = (-n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  bool flip() { return (next_u64() >> 63) != 0; }

  // Standard normal via Box-Muller (second value cached).
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  // Exact Poisson sampling at any mean: sequential inversion below 10,
  // Hormann's PTRS transformed rejection at 10 and above. No Gaussian
  // substitution at large means.
  long long poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("Rng::poisson: mean must be >= 0");
    if (mean == 0.0) return 0;
    if (mean < 10.0) return poisson_inversion(mean);
    return poisson_ptrs(mean);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  long long poisson_inversion(double mean) {
    const double q = std::exp(-mean);
    long long k = 0;
    double prod = 1.0;
    const double u = uniform01();
    double cdf = q;
    double pk = q;
    // CDF recurrence p_{k+1} = p_k * mean / (k+1)
    while (u > cdf) {
      ++k;
      pk *= mean / static_cast<double>(k);
      cdf += pk;
      if (k > 200) break;  // mean < 10: beyond any realistic tail
    }
    (void)prod;
    return k;
  }

  long long poisson_ptrs(double mean) {
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
      double u = uniform01() - 0.5;
      double v = uniform01();
      const double us = 0.5 - std::abs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<long long>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      const double k = kf;
      if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
          k * log_mean - mean - std::lgamma(k + 1.0)) {
        return static_cast<long long>(kf);
      }
    }
  }

  std::array<std::uint64_t, 4> state_{};
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace fluxcs
