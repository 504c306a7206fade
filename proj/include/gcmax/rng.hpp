#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace gcmax {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child seed for an independent stream identified by `tag`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  return splitmix64(seed ^ splitmix64(tag ^ 0xD1B54A32D192ED03ULL));
}

/// Engine for one chunk of a stream. Each chunk gets its own engine so the
/// values of chunk k never depend on how many chunks ran before it or on
/// which thread ran them.
inline std::mt19937_64 chunk_engine(std::uint64_t stream_seed, std::uint64_t chunk) {
  return std::mt19937_64(derive_seed(stream_seed, chunk));
}

inline void fill_standard_normal(std::mt19937_64& engine, std::span<double> out) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out) v = normal(engine);
}

}  // namespace gcmax
