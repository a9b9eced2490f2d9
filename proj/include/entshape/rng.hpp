#pragma once

// Seed derivation for reproducible Monte Carlo runs.
//
// Run i of an experiment with master seed s draws from
//   std::mt19937_64(splitmix64(s + (i + 1) * 0x9E3779B97F4A7C15))
// so every run owns an independent stream that does not depend on how runs
// are scheduled across workers.

#include <cstdint>
#include <random>

namespace entshape::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t run_seed(std::uint64_t master_seed, std::uint64_t run_index) noexcept {
  return splitmix64(master_seed + (run_index + 1) * kGolden);
}

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace entshape::rng
