#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rsfbm {

/// Thread count used when callers pass 0. Defaults to hardware concurrency.
inline std::atomic<unsigned>& default_threads_ref() {
  static std::atomic<unsigned> n{0};
  return n;
}

inline unsigned default_threads() {
  const unsigned n = default_threads_ref().load();
  if (n > 0) return n;
  return std::max(1u, std::thread::hardware_concurrency());
}

inline void set_default_threads(unsigned n) { default_threads_ref().store(n); }

/// Calls body(i) for i in [0, n) on contiguous blocks. Results must be written
/// by index; reductions belong to the caller, in index order, afterwards.
template <class Body>
void parallel_for(std::size_t n, Body&& body, unsigned threads = 0) {
  if (threads == 0) threads = default_threads();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  const std::size_t block = (n + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t lo = w * block, hi = std::min(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first) first = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace rsfbm
