#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace sparsegreedy {

/// C(n, k), or nullopt when it does not fit in 63 bits.
std::optional<std::uint64_t> binomial(std::uint64_t n, std::uint64_t k);

/// C(n, k) saturated at `limit + 1`; enough to compare against a cap.
std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t limit);

/// The combination of rank `rank` (lexicographic order) of k elements out of n.
std::vector<int> unrank_combination(std::uint64_t rank, int n, int k);

/// Advances `combo` to the lexicographic successor; false after the last one.
bool next_combination(std::vector<int>& combo, int n);

/// Uniform random k-subset of [0, n), sorted ascending.
template <typename Urbg>
std::vector<int> random_subset(int n, int k, Urbg& rng);

}  // namespace sparsegreedy

#include <algorithm>
#include <numeric>
#include <random>

namespace sparsegreedy {

template <typename Urbg>
std::vector<int> random_subset(int n, int k, Urbg& rng) {
  // Floyd's algorithm
  std::vector<int> out;
  out.reserve(k);
  for (int j = n - k; j < n; ++j) {
    std::uniform_int_distribution<int> pick(0, j);
    int t = pick(rng);
    if (std::find(out.begin(), out.end(), t) == out.end())
      out.push_back(t);
    else
      out.push_back(j);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace sparsegreedy
