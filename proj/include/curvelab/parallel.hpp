#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace curvelab {

namespace detail {
inline std::atomic<int>& requested_threads() {
  static std::atomic<int> n{0};
  return n;
}
inline thread_local bool inside_parallel_region = false;
}  // namespace detail

// 0 means "use CURVELAB_THREADS or the hardware count".
inline void set_thread_count(int n) { detail::requested_threads() = n < 0 ? 0 : n; }

inline int thread_count() {
  if (const char* env = std::getenv("CURVELAB_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  int n = detail::requested_threads();
  if (n > 0) return n;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static contiguous partition of [0, n). Each index is processed exactly once and
// every index writes only its own output, so results do not depend on the thread
// count. Nested calls run serially.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  if (n == 0) return;
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
  if (workers <= 1 || detail::inside_parallel_region) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run_block = [&](std::size_t w) {
    detail::inside_parallel_region = true;
    std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
    try {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
    detail::inside_parallel_region = false;
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run_block, w);
  run_block(0);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace curvelab
