#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sparsegreedy {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_name(std::string_view name) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed of the named substream `name` with index `index` derived from `root`.
constexpr std::uint64_t substream_seed(std::uint64_t root, std::string_view name, std::uint64_t index = 0) noexcept {
  return mix64(mix64(root ^ hash_name(name)) + index);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t root, std::string_view name, std::uint64_t index = 0) {
  return Rng(substream_seed(root, name, index));
}

}  // namespace sparsegreedy
