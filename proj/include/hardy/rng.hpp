#pragma once

#include <cstdint>
#include <random>

namespace hardy::rng {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of substream `index` within stream `stream` of a run seeded by `seed`.
/// Each Monte-Carlo path owns one substream, so results never depend on which
/// thread simulated which path.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream,
                                       std::uint64_t index) {
  return mix64(mix64(mix64(seed) ^ stream) + index);
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return Engine(substream_seed(seed, stream, index));
}

}  // namespace hardy::rng
