#include "jf/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <exception>
#include <mutex>

namespace jf {

namespace {
std::atomic<int> g_maxThreads{0};  // 0 = use OpenMP default
}

int maxThreads() {
  int n = g_maxThreads.load(std::memory_order_relaxed);
  return n > 0 ? n : omp_get_max_threads();
}

void setMaxThreads(int n) { g_maxThreads.store(n, std::memory_order_relaxed); }

namespace detail {

// Exceptions must not unwind out of an OpenMP region: the first one is
// captured and rethrown after the loop.
void runChunksParallel(long numChunks, void* ctx, void (*call)(void*, long)) {
  const int threads = maxThreads();
  std::exception_ptr error;
  std::mutex errorMutex;
  std::atomic<bool> failed{false};
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long c = 0; c < numChunks; ++c) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      call(ctx, c);
    } catch (...) {
      std::lock_guard<std::mutex> lock(errorMutex);
      if (!error) error = std::current_exception();
      failed.store(true, std::memory_order_relaxed);
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace detail
}  // namespace jf
