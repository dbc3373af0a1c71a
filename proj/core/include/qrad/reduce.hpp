#pragma once

#include <cstddef>
#include <utility>

namespace qrad {

/// Deterministic pairwise (fixed binary tree) reduction.
///
/// Every grid integral and flux sum in the lab goes through this primitive so
/// that results are reproducible bit-for-bit between runs and independent of
/// the number of worker threads: the reduction tree depends only on the index
/// range, never on scheduling.  Pairwise summation also keeps round-off growth
/// at O(log N) instead of O(N), which matters when high-order time derivatives
/// amplify sample-to-sample noise.
///
/// `f(i)` produces the i-th term; `T` needs `+=` and value initialisation.
template <class T, class F>
T pairwise_transform_sum(std::size_t lo, std::size_t hi, F&& f) {
  if (hi <= lo) return T{};
  const std::size_t n = hi - lo;
  if (n <= 16) {
    T acc = f(lo);
    for (std::size_t i = lo + 1; i < hi; ++i) acc += f(i);
    return acc;
  }
  const std::size_t mid = lo + n / 2;
  T left = pairwise_transform_sum<T>(lo, mid, f);
  left += pairwise_transform_sum<T>(mid, hi, f);
  return left;
}

template <class T, class F>
T pairwise_transform_sum(std::size_t n, F&& f) {
  return pairwise_transform_sum<T>(std::size_t{0}, n, std::forward<F>(f));
}

}  // namespace qrad
