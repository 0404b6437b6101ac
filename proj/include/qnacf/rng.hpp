#pragma once

#include <cstdint>
#include <random>

namespace qnacf {

/// Independent random streams per (master seed, replication, purpose).
enum class StreamPurpose : std::uint64_t {
  process = 1,
  outliers = 2,
  auxiliary = 3,
};

/// SplitMix64 finaliser.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of stream (master, replication, purpose); distinct keys give unrelated seeds.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replication,
                                    StreamPurpose purpose) noexcept {
  return splitmix64(splitmix64(splitmix64(master) ^ replication) ^ static_cast<std::uint64_t>(purpose));
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) { return Engine(splitmix64(seed)); }

}  // namespace qnacf
