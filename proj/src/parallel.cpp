#include "funclbm/parallel.hpp"

#include <atomic>
#include <cstdlib>

namespace funclbm {

namespace {

std::size_t default_thread_count() {
  if (const char* env = std::getenv("FUNCLBM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::atomic<std::size_t> g_thread_count{0};

}  // namespace

std::size_t thread_count() {
  const std::size_t n = g_thread_count.load(std::memory_order_relaxed);
  if (n > 0) return n;
  static const std::size_t deflt = default_thread_count();
  return deflt;
}

void set_thread_count(std::size_t n) {
  g_thread_count.store(n, std::memory_order_relaxed);
}

}  // namespace funclbm
