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

namespace ergolab {

namespace detail {
inline std::atomic<unsigned>& worker_setting() {
  static std::atomic<unsigned> setting{0};
  return setting;
}
} // namespace detail

// Worker count used by the parallel loops. ERGO_LAB_THREADS overrides the
// programmatic setting; the default is 1.
inline unsigned worker_count() {
  if (const char* env = std::getenv("ERGO_LAB_THREADS"); env != nullptr && *env != '\0') {
    try {
      const long v = std::stol(env);
      if (v >= 1) {
        return static_cast<unsigned>(std::min<long>(v, 256));
      }
    } catch (const std::exception&) {
    }
  }
  const unsigned s = detail::worker_setting().load();
  return s == 0 ? 1U : s;
}

inline void set_worker_count(unsigned n) { detail::worker_setting().store(n); }

// Calls body(i) for i in [0, n). Each index is handled exactly once and
// results must be written to per-index slots, which keeps outputs
// independent of the worker count.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      body(i);
    }
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) {
          body(i);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

} // namespace ergolab
