#pragma once

#include <algorithm>
#include <cstdint>

namespace jf {

// Every data-parallel kernel takes an execution policy. Serial is the
// reference path used by the tests and the benchmark; Parallel runs the same
// chunk decomposition under OpenMP. Both produce bit-identical output: work
// is split into fixed-size chunks independent of the thread count, each chunk
// is processed in ascending element order, and any cross-chunk reduction
// happens serially in chunk order.
enum class Exec { Serial, Parallel };

// Global thread cap honored by all Parallel kernels (CLI --threads).
int maxThreads();
void setMaxThreads(int n);

inline constexpr long kDefaultChunk = 128;

// Invokes fn(chunkIndex, begin, end) for each chunk of [0, n). Chunk
// boundaries depend only on n and chunk, never on the thread count.
template <typename Fn>
void forEachChunk(Exec exec, long n, long chunk, Fn&& fn);

// Element-wise parallel loop for kernels whose slots are written
// independently (no reductions). fn(i).
template <typename Fn>
void forEachIndex(Exec exec, long n, Fn&& fn);

namespace detail {
void runChunksParallel(long numChunks, void* ctx, void (*call)(void*, long));
}

template <typename Fn>
void forEachChunk(Exec exec, long n, long chunk, Fn&& fn) {
  if (n <= 0) return;
  const long numChunks = (n + chunk - 1) / chunk;
  if (exec == Exec::Serial || numChunks == 1) {
    for (long c = 0; c < numChunks; ++c) {
      fn(c, c * chunk, std::min(n, (c + 1) * chunk));
    }
    return;
  }
  struct Ctx {
    Fn* fn;
    long n, chunk;
  } ctx{&fn, n, chunk};
  detail::runChunksParallel(
      numChunks, &ctx, [](void* p, long c) {
        auto* s = static_cast<Ctx*>(p);
        (*s->fn)(c, c * s->chunk, std::min(s->n, (c + 1) * s->chunk));
      });
}

template <typename Fn>
void forEachIndex(Exec exec, long n, Fn&& fn) {
  forEachChunk(exec, n, kDefaultChunk, [&](long, long begin, long end) {
    for (long i = begin; i < end; ++i) fn(i);
  });
}

}  // namespace jf
