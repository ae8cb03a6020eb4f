#pragma once

// Index-ordered replication maps. The OpenMP and serial versions return
// identical vectors for any thread count.

#include <cstddef>
#include <exception>
#include <mutex>
#include <vector>

namespace hawkes_stein {

// requested > 0 wins, then HAWKES_STEIN_THREADS, then the OpenMP default.
int resolve_threads(int requested = 0);

template <class T, class F>
std::vector<T> serial_map(std::size_t n, F&& f) {
  std::vector<T> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(f(i));
  return out;
}

template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& f, int threads = 0) {
  std::vector<T> out(n);
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto sn = static_cast<std::ptrdiff_t>(n);
  const int nt = resolve_threads(threads);
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
  for (std::ptrdiff_t i = 0; i < sn; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace hawkes_stein
