#pragma once

#include <cstdint>
#include <random>

namespace slicearena {

/// The one generator used everywhere: 64-bit Mersenne Twister.
using Rng = std::mt19937_64;

/// Independent named streams derived from one seed. Each subsystem pulls its
/// own stream so that, e.g., arrivals do not shift when a policy draws more
/// random numbers.
enum class Stream : std::uint64_t {
  arrivals = 1,
  departures = 2,
  power = 3,
  policy = 4,
  adversary = 5,
  selection = 6,
  init = 7,
  shuffle = 8,
};

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  return make_rng(seed, (static_cast<std::uint64_t>(stream) << 32) ^ index);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child seed k of `seed` (episode seeds, ensemble members).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) { return splitmix64(splitmix64(seed) ^ k); }

} // namespace slicearena
