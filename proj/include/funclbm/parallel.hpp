#pragma once

// Deterministic fork-join helper. Work items write only to their own index,
// so the chunking never affects results; reductions stay with the caller and
// run serially. Nested calls degrade to serial execution instead of
// oversubscribing.

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace funclbm {

// Process-wide worker count: FUNCLBM_THREADS env var, else hardware
// concurrency. set_thread_count() overrides (0 restores the default).
std::size_t thread_count();
void set_thread_count(std::size_t n);

namespace detail {
inline thread_local bool in_parallel_region = false;
}

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t min_grain = 1) {
  const std::size_t workers = thread_count();
  if (n == 0) return;
  if (workers <= 1 || n <= min_grain || detail::in_parallel_region) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t used = std::min(workers, (n + min_grain - 1) / min_grain);
  std::vector<std::thread> threads;
  threads.reserve(used);
  std::vector<std::exception_ptr> errors(used);
  for (std::size_t t = 0; t < used; ++t) {
    const std::size_t begin = n * t / used;
    const std::size_t end = n * (t + 1) / used;
    threads.emplace_back([&, begin, end, t] {
      detail::in_parallel_region = true;
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
      detail::in_parallel_region = false;
    });
  }
  for (auto& th : threads) th.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace funclbm
