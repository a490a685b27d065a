#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace memrlab {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// FNV-1a hash, used to turn purpose labels into stream coordinates.
constexpr std::uint64_t tag(std::string_view label) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Maps (seed, coordinate path) to an independent 64-bit stream seed. The
/// result depends only on the path, never on the order streams are created,
/// so work can be scheduled freely without changing any draw.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = splitmix64(seed ^ 0x6A09E667F3BCC908ULL);
  for (std::uint64_t p : path)
    h = splitmix64(h ^ splitmix64(p + 0x3C6EF372FE94F82BULL));
  return h;
}

inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  return Rng(derive_seed(seed, path));
}

inline double standard_normal(Rng &rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline double uniform_real(Rng &rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

} // namespace memrlab
