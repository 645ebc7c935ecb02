#ifndef HOPEWAVE_PARALLEL_HPP
#define HOPEWAVE_PARALLEL_HPP

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace hopewave {

/// Run fn(i) for i in [0, count) on up to `threads` workers with a static,
/// contiguous partition. Callers write results into per-index slots and reduce
/// them in index order, so output does not depend on the worker count.
/// The first exception thrown by any worker is rethrown on the caller.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, std::min<int>(threads, static_cast<int>(count))));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = count * w / workers, end = count * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Worker count from HOPEWAVE_THREADS, or `fallback` when unset or invalid.
inline int threads_from_env(int fallback = 1) {
  if (const char* s = std::getenv("HOPEWAVE_THREADS")) {
    try {
      const int v = std::stoi(s);
      if (v >= 1) return v;
    } catch (const std::exception&) {
    }
  }
  return fallback;
}

}  // namespace hopewave

#endif
