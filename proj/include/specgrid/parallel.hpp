#ifndef SPECGRID_PARALLEL_HPP
#define SPECGRID_PARALLEL_HPP

#include <atomic>

#include <Eigen/Core>

namespace specgrid {

namespace detail {
inline std::atomic<int> g_thread_count{1};
}

inline int thread_count() { return detail::g_thread_count.load(std::memory_order_relaxed); }

/// Sets the worker count for pixel loops and Eigen's GEMM. Values < 1 mean 1.
inline void set_thread_count(int n) {
  if (n < 1) n = 1;
  detail::g_thread_count.store(n, std::memory_order_relaxed);
  Eigen::setNbThreads(n);
}

/// Static-schedule loop over [begin, end). `body` must not throw.
template <typename Body>
void parallel_for(Eigen::Index begin, Eigen::Index end, Body&& body) {
  const int n = thread_count();
  if (n <= 1 || end - begin < 2) {
    for (Eigen::Index i = begin; i < end; ++i) body(i);
    return;
  }
#pragma omp parallel for num_threads(n) schedule(static)
  for (Eigen::Index i = begin; i < end; ++i) body(i);
}

}  // namespace specgrid

#endif  // SPECGRID_PARALLEL_HPP
