#ifndef ACCRUE_PARALLEL_HPP_
#define ACCRUE_PARALLEL_HPP_

#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace accrue {

// Worker-thread cap: ACCRUE_THREADS when set and positive, otherwise the
// hardware concurrency.  Results never depend on this value; it only
// controls how index ranges are split across threads.
inline int thread_count() {
  if (const char* env = std::getenv("ACCRUE_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace detail {
inline thread_local bool in_parallel_region = false;
}

// Run fn(i) for i in [0, n).  Every index owns its output slot and its own
// RNG stream, so the schedule cannot influence the result.  The first
// exception thrown by any index is rethrown on the calling thread.  Nested
// calls run serially to avoid thread oversubscription.
inline void parallel_for(long n, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  long workers = std::min<long>(thread_count(), n);
  if (workers <= 1 || detail::in_parallel_region) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (long w = 0; w < workers; ++w) {
    long lo = n * w / workers;
    long hi = n * (w + 1) / workers;
    pool.emplace_back([&, w, lo, hi] {
      detail::in_parallel_region = true;
      try {
        for (long i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace accrue

#endif  // ACCRUE_PARALLEL_HPP_
