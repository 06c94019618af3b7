#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace evoindex {

/// The seeded stream every stochastic operation takes explicitly.
using Rng = std::mt19937_64;

// The helpers below avoid std::*_distribution so that seeded runs are
// reproducible across standard library implementations.

/// Uniform draw on the open interval (0, 1).
inline double uniform_open01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform integer in [0, n). n must be positive.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  // Rejection on the largest multiple of n keeps the draw unbiased.
  const std::uint64_t limit = Rng::max() - (Rng::max() % n + 1) % n;
  std::uint64_t x = rng();
  while (x > limit) x = rng();
  return x % n;
}

/// Exponential draw with the given rate, via inversion of an open-interval uniform.
inline double exponential(Rng& rng, double rate) { return -std::log(uniform_open01(rng)) / rate; }

}  // namespace evoindex
