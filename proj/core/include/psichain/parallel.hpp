#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace psichain {

// Process-wide worker count used by parallel_for. Results never depend on it.
unsigned thread_count();
void set_thread_count(unsigned n);

namespace detail {
// Set inside worker threads; nested parallel_for calls then run inline.
inline thread_local bool in_worker = false;
}  // namespace detail

// Runs fn(i) for i in [0, count). Work is claimed dynamically; callers store
// results by index so the reduction order is fixed. If several tasks throw,
// the exception of the lowest index is rethrown.
template <class F>
void parallel_for(std::size_t count, F&& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), count));
  if (workers <= 1 || detail::in_worker) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex guard;
  std::exception_ptr error;
  std::size_t error_index = count;
  auto body = [&] {
    detail::in_worker = true;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(guard);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace psichain
