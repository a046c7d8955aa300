// Deterministic parallel helpers.
//
// All reductions in the library are structured as "compute independent
// partials into preassigned slots, then combine in a fixed order", so the
// numeric result does not depend on how many threads execute the slots.
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace orbitml {

/// Number of worker threads used by parallel_for (>= 1).
int num_threads();

/// Set the worker thread count (clamped to >= 1).
void set_num_threads(int n);

/// Runs fn(i) for i in [0, n). Work is distributed over num_threads()
/// threads; nested calls run serially inside the calling worker.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Fixed-shape binary-tree sum of partials[lo, hi); deterministic for any
/// thread count because the tree depends only on the index range.
template <class T, class Add>
T pairwise_combine(const std::vector<T>& partials, std::size_t lo,
                   std::size_t hi, const Add& add) {
  if (hi - lo == 1) return partials[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return add(pairwise_combine(partials, lo, mid, add),
             pairwise_combine(partials, mid, hi, add));
}

template <class T, class Add>
T pairwise_combine(const std::vector<T>& partials, const Add& add) {
  return pairwise_combine(partials, 0, partials.size(), add);
}

inline double pairwise_sum(const std::vector<double>& partials) {
  if (partials.empty()) return 0.0;
  return pairwise_combine(partials,
                          [](double a, double b) { return a + b; });
}

/// Chunk size for per-sample reductions; fixed so results are independent
/// of threading and of whether the loop is split.
inline constexpr std::size_t kReduceChunk = 1024;

}  // namespace orbitml
