#pragma once

#include <cstdint>
#include <random>

namespace roomflow {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent per-item seeds so that
// results do not depend on evaluation order.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix_seed(mix_seed(seed) ^ (index + 0x632BE59BD9B4E019ull));
}

}  // namespace roomflow
