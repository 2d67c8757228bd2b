#pragma once

#include <cstddef>
#include <functional>

namespace subexp {

// Worker count: SUBEXP_LASSO_THREADS if set, else the value from set_thread_count, else 1.
int thread_count();
void set_thread_count(int threads);

// Runs fn(i) for i in [0, count). Work items must write only to their own slots.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

// Fixed partition count for Monte Carlo loops, so results do not depend on thread_count().
inline constexpr std::size_t kMcChunks = 8;

struct ChunkRange {
  std::size_t begin;
  std::size_t end;
};
ChunkRange chunk_range(std::size_t total, std::size_t chunk, std::size_t chunks = kMcChunks);

}  // namespace subexp
