#include "qrad/threading.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qrad {

namespace {
std::atomic<int> g_default_threads{0};
}

int resolve_thread_count(int requested) {
  if (const char* env = std::getenv("QRAD_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) requested = n;
  }
  if (requested <= 0) requested = int(std::thread::hardware_concurrency());
  return std::clamp(requested, 1, 64);
}

void set_default_threads(int n) { g_default_threads.store(n); }
int default_threads() { return g_default_threads.load(); }

namespace detail {

void parallel_for_impl(std::size_t n, int threads, void* ctx, void (*body)(void*, std::size_t)) {
  if (n == 0) return;
  const int workers = std::min<std::size_t>(resolve_thread_count(threads <= 0 ? default_threads()
                                                                              : threads),
                                            n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(ctx, i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  // The first exception thrown by any worker is rethrown on the calling
  // thread once every worker has joined.
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run_range = [&](std::size_t lo, std::size_t hi) {
    try {
      for (std::size_t i = lo; i < hi; ++i) body(ctx, i);
    } catch (...) {
      const std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };
  const std::size_t chunk = (n + workers - 1) / workers;
  for (int w = 1; w < workers; ++w) {
    const std::size_t lo = std::min(n, std::size_t(w) * chunk);
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo < hi) pool.emplace_back(run_range, lo, hi);
  }
  run_range(0, std::min(n, chunk));
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

}  // namespace qrad
