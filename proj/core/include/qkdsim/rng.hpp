#pragma once

#include <cstdint>
#include <random>

namespace qkdsim {

/// Sequential generator used for every streamed random quantity.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits. Independent of the
/// standard library's distribution implementations, so results match across
/// toolchains for a given seed.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child seed for (seed, index). Used for sweep runs and for the named
/// sub-streams of a single run.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// Counter-based uniform in [0, 1): random access by (key, counter), no state.
constexpr double hashed_uniform(std::uint64_t key, std::uint64_t counter) {
  return static_cast<double>(mix_seed(key, counter) >> 11) * 0x1.0p-53;
}

/// Sub-stream identifiers for one scenario run.
enum class Stream : std::uint64_t {
  alice = 1,
  detectors = 2,
  visibility = 3,
  eve = 4,
  attack_cycles = 5,
};

constexpr std::uint64_t stream_seed(std::uint64_t run_seed, Stream s) {
  return mix_seed(run_seed, static_cast<std::uint64_t>(s) << 56);
}

}  // namespace qkdsim
