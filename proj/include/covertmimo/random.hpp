#pragma once

#include <cstdint>
#include <random>

namespace covertmimo {

using Rng = std::mt19937_64;

// Seed for an independent stream derived from (master, index). Uses the
// splitmix64 finalizer so neighbouring indices give unrelated seeds; results
// depend only on the pair, never on the order in which streams are created.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Rng make_stream(std::uint64_t master, std::uint64_t index) {
  return Rng(stream_seed(master, index));
}

}  // namespace covertmimo
