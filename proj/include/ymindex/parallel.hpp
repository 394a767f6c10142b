#pragma once

// Node loops and reductions. Reductions are blocked with a fixed block size
// and the block partials are combined by a pairwise tree in block order, so
// sums are bit-identical for any thread count.

#include <cstddef>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ymindex {

inline int worker_count() {
  static const int count = [] {
    int n = 1;
#ifdef _OPENMP
    n = omp_get_max_threads();
#endif
    if (const char* env = std::getenv("YM_THREADS")) {
      try {
        const int cap = std::stoi(env);
        if (cap > 0 && cap < n) n = cap;
      } catch (...) {
      }
    }
    return n;
  }();
  return count;
}

template <class F>
void parallel_for(std::size_t n, F&& f) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(worker_count())
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) f(static_cast<std::size_t>(i));
#else
  for (std::size_t i = 0; i < n; ++i) f(i);
#endif
}

inline double pairwise_sum(std::vector<double>& v) {
  if (v.empty()) return 0.0;
  std::size_t len = v.size();
  while (len > 1) {
    const std::size_t half = (len + 1) / 2;
    for (std::size_t i = 0; i + half < len; ++i) v[i] += v[i + half];
    len = half;
  }
  return v[0];
}

inline constexpr std::size_t kReductionBlock = 2048;

// Sum of f(i) for i in [0, n).
template <class F>
double deterministic_sum(std::size_t n, F&& f) {
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(blocks, 0.0);
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t lo = b * kReductionBlock;
    const std::size_t hi = lo + kReductionBlock < n ? lo + kReductionBlock : n;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += f(i);
    partial[b] = s;
  });
  return pairwise_sum(partial);
}

// Maximum of f(i); returns `init` for n == 0.
template <class F>
double deterministic_max(std::size_t n, F&& f, double init = 0.0) {
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(blocks, init);
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t lo = b * kReductionBlock;
    const std::size_t hi = lo + kReductionBlock < n ? lo + kReductionBlock : n;
    double m = init;
    for (std::size_t i = lo; i < hi; ++i) {
      const double v = f(i);
      if (v > m) m = v;
    }
    partial[b] = m;
  });
  double m = init;
  for (double v : partial)
    if (v > m) m = v;
  return m;
}

}  // namespace ymindex
