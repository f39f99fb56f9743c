#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace soco {

// Every stochastic component draws from an explicitly owned engine; there is
// no global RNG anywhere in the library.
using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double normal(Rng& rng, double mean, double stddev) {
  return std::normal_distribution<double>(mean, stddev)(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Standard Gumbel(0, 1) sample.
inline double gumbel(Rng& rng) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  while (u <= 0.0) u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return -std::log(-std::log(u));
}

// Derives an independent child seed; used to fan a run seed out into streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace soco
