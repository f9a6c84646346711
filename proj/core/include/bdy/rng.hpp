#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>

namespace bdy {

/// Deterministic random stream: std::mt19937_64 with fixed, documented
/// mappings (no std::*_distribution, whose outputs vary across standard
/// library implementations).
///
/// Event draw order in the ABM: holding time, giver index, receiver
/// offset, cheat coin. The coin is drawn only when the giver is a
/// cheater holding at least one dollar.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Unbiased uniform integer in [0, n) by modulo rejection.
  std::uint64_t uniform_below(std::uint64_t n) {
    assert(n > 0);
    const std::uint64_t threshold = (-n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = gen_();
      if (x >= threshold) return x % n;
    }
  }

  /// Exponential holding time with the given rate.
  double exponential(double rate) {
    return -std::log1p(-uniform01()) / rate;
  }

  /// True with probability p.
  bool bernoulli(double p) { return uniform01() < p; }

  /// Standard normal via Box-Muller (used by test samplers).
  double normal() {
    double u1 = uniform01();
    while (u1 == 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace bdy
