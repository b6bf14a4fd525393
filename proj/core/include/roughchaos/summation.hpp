#pragma once

#include <algorithm>
#include <cstring>
#include <span>
#include <vector>

namespace roughchaos {

/// Sum that depends only on the multiset of addends, not their order.
/// Particle sums go through here so that permuting particles permutes
/// solver output exactly, bit for bit.
inline double permutation_invariant_sum(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end(), [](double a, double b) {
    if (a < b) return true;
    if (b < a) return false;
    // Orders ties (and NaNs) by bit pattern so the sort is a total order.
    std::uint64_t ba, bb;
    std::memcpy(&ba, &a, sizeof(double));
    std::memcpy(&bb, &b, sizeof(double));
    return ba < bb;
  });
  double acc = 0.0;
  for (double v : sorted) acc += v;
  return acc;
}

inline double permutation_invariant_mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return permutation_invariant_sum(values) / static_cast<double>(values.size());
}

}  // namespace roughchaos
