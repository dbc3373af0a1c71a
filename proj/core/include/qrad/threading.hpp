#pragma once

#include <cstddef>
#include <memory>
#include <type_traits>

namespace qrad {

/// Resolve the worker-thread count: the QRAD_THREADS environment variable
/// overrides `requested`; 0 means "hardware concurrency".  Clamped to [1, 64].
int resolve_thread_count(int requested);

/// Process-wide default used by the pipelines (set from the CLI --threads
/// flag).  Starts at 0 ("auto").
void set_default_threads(int n);
int default_threads();

namespace detail {
void parallel_for_impl(std::size_t n, int threads, void* ctx, void (*body)(void*, std::size_t));
}

/// Static contiguous partition of [0, n) over `threads` workers.  Each index
/// must write only its own output slot; with that discipline results are
/// bit-identical for any thread count, because no reduction order ever
/// depends on scheduling.  threads <= 0 means "use the process default".
template <class F>
void parallel_for(std::size_t n, F&& f, int threads = 0) {
  using Fn = std::remove_reference_t<F>;
  detail::parallel_for_impl(n, threads, std::addressof(f),
                            [](void* ctx, std::size_t i) { (*static_cast<Fn*>(ctx))(i); });
}

}  // namespace qrad
