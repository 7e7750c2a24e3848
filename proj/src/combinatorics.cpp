#include "sparsegreedy/combinatorics.hpp"

#include <limits>
#include <stdexcept>

namespace sparsegreedy {

std::optional<std::uint64_t> binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    acc = acc * (n - k + i) / i;
    if (acc > std::numeric_limits<std::int64_t>::max()) return std::nullopt;
  }
  return static_cast<std::uint64_t>(acc);
}

std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t limit) {
  const auto b = binomial(n, k);
  if (!b || *b > limit) return limit + 1;
  return *b;
}

std::vector<int> unrank_combination(std::uint64_t rank, int n, int k) {
  std::vector<int> out;
  out.reserve(k);
  int x = 0;
  for (int slot = 0; slot < k; ++slot) {
    for (;; ++x) {
      // combinations whose element at `slot` is x
      const std::uint64_t block = *binomial(n - x - 1, k - slot - 1);
      if (rank < block) break;
      rank -= block;
    }
    out.push_back(x++);
  }
  return out;
}

bool next_combination(std::vector<int>& combo, int n) {
  const int k = static_cast<int>(combo.size());
  int i = k - 1;
  while (i >= 0 && combo[i] == n - k + i) --i;
  if (i < 0) return false;
  ++combo[i];
  for (int j = i + 1; j < k; ++j) combo[j] = combo[j - 1] + 1;
  return true;
}

}  // namespace sparsegreedy
