#pragma once

#include <cstdint>
#include <random>

namespace fdd {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Stable child seed for stream `index` under `seed`. Used wherever work is
/// split into independently seeded units (trees, scenarios, pipeline stages)
/// so results do not depend on execution order.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::uint64_t index) noexcept {
  return mix64(mix64(seed) ^ (index * 0xD6E8FEB86659FD93ULL + 1));
}

}  // namespace fdd
