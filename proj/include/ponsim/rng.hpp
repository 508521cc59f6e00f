#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ponsim {

/// SplitMix64 finalizer; used only to derive independent seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for a named substream, e.g. derive_seed(run_seed, {kTrafficStream, onu}).
/// Substreams never depend on how many siblings exist.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

inline constexpr std::uint64_t kTopologyStream = 1;
inline constexpr std::uint64_t kTrafficStream = 2;

/// The simulator's generator: 64-bit Mersenne Twister, whose output sequence
/// is fixed by the C++ standard. Distributions are implemented locally so
/// streams are identical across standard libraries.
using Rng = std::mt19937_64;

/// Uniform double in (0, 1], 53-bit resolution.
inline double uniform_open0(Rng& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

/// Uniform double in [0, 1), 53-bit resolution.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace ponsim
