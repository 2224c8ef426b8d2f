#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace idionet {

/// All experiment randomness flows through this engine. The helpers below avoid
/// the standard distributions, whose output is implementation-defined, so that
/// seeded results are identical across standard libraries.
using Rng = std::mt19937_64;

/// SplitMix64 finaliser; mixes a salt into a base seed for hierarchical seeding.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) noexcept {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Uniform integer in [0, n), n > 0. Rejection sampling, no modulo bias.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = Rng::max() - (Rng::max() % bound + 1) % bound;
  std::uint64_t draw = rng();
  while (draw > limit) draw = rng();
  return static_cast<std::size_t>(draw % bound);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Fisher-Yates over the first `prefix` positions: afterwards items[0, prefix) is a
/// uniform sample without replacement in uniform order.
template <typename T>
void partial_shuffle(std::span<T> items, std::size_t prefix, Rng& rng) {
  for (std::size_t i = 0; i < prefix && i + 1 < items.size(); ++i) {
    const std::size_t j = i + uniform_index(rng, items.size() - i);
    using std::swap;
    swap(items[i], items[j]);
  }
}

template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  partial_shuffle(items, items.size(), rng);
}

}  // namespace idionet
