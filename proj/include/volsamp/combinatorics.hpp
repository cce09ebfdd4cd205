#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include "volsamp/measure_model.hpp"

namespace volsamp {

/// C(n, k) as a double (exact for every value this library enumerates).
inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (std::size_t i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(out);
}

/// Advances `subset` to the next k-subset of {0..n-1} in lexicographic order.
inline bool next_subset(IndexList& subset, std::size_t n) {
  const std::size_t k = subset.size();
  if (k == 0) return false;
  std::size_t i = k;
  while (i > 0) {
    --i;
    if (subset[i] < n - k + i) {
      ++subset[i];
      for (std::size_t j = i + 1; j < k; ++j) subset[j] = subset[j - 1] + 1;
      return true;
    }
  }
  return false;
}

inline IndexList first_subset(std::size_t k) {
  IndexList s(k);
  for (std::size_t i = 0; i < k; ++i) s[i] = i;
  return s;
}

/// Calls visit(subset) for every k-subset of {0..n-1} in lexicographic order.
template <typename Visitor>
void for_each_subset(std::size_t n, std::size_t k, Visitor&& visit) {
  if (k > n) return;
  IndexList s = first_subset(k);
  do {
    visit(static_cast<const IndexList&>(s));
  } while (next_subset(s, n));
}

}  // namespace volsamp
