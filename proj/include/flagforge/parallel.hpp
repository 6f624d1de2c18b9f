#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace flagforge {

namespace detail {
inline std::atomic<int>& worker_setting() {
  static std::atomic<int> workers{1};
  return workers;
}
}  // namespace detail

/// Worker count for the parallel paths. Results never depend on it.
inline void set_workers(int n) { detail::worker_setting() = std::max(1, n); }
inline int workers() { return detail::worker_setting(); }

/// Calls fn(i) for every i in [0, count). Each index writes only its own output slot, so the
/// result is independent of scheduling. The first exception thrown is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(workers()), count);
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace flagforge
