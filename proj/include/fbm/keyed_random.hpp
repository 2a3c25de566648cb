#pragma once

// Counter-based randomness: every draw is a pure function of its key, so
// results do not depend on evaluation order or thread layout.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace fbm {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t keyed_bits(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t stream) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return splitmix64(h ^ (stream * 0xD1B54A32D192ED03ull));
}

// Uniform in [0, 1) with 53 random bits.
constexpr double keyed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t stream) {
  return static_cast<double>(keyed_bits(seed, a, b, stream) >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller on streams (2*stream, 2*stream + 1).
inline double keyed_gaussian(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t stream) {
  const double u1 = 1.0 - keyed_uniform(seed, a, b, 2 * stream);  // (0, 1]
  const double u2 = keyed_uniform(seed, a, b, 2 * stream + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace fbm
