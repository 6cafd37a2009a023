#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ironyprof {

/// Process-wide worker count used by parallel_for; 1 means run inline.
void set_default_jobs(unsigned jobs);
unsigned default_jobs();

namespace detail {
// Set inside pool workers so nested parallel_for calls run inline.
inline thread_local bool in_worker = false;
}  // namespace detail

/// Calls fn(i) for every i in [0, n). Work items must write to disjoint
/// outputs; the first exception thrown by any item is rethrown here.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned jobs = default_jobs()) {
  if (jobs <= 1 || n <= 1 || detail::in_worker) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    detail::in_worker = true;
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    unsigned count = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace ironyprof
