#include "subexp/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace subexp {
namespace {

std::atomic<int> g_threads{1};

int env_threads() {
  const char* raw = std::getenv("SUBEXP_LASSO_THREADS");
  if (raw == nullptr || *raw == '\0') return 0;
  try {
    const int v = std::stoi(raw);
    return v > 0 ? v : 0;
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

int thread_count() {
  const int env = env_threads();
  return env > 0 ? env : g_threads.load();
}

void set_thread_count(int threads) { g_threads.store(threads > 0 ? threads : 1); }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

ChunkRange chunk_range(std::size_t total, std::size_t chunk, std::size_t chunks) {
  const std::size_t base = total / chunks;
  const std::size_t extra = total % chunks;
  const std::size_t begin = chunk * base + std::min(chunk, extra);
  return {begin, begin + base + (chunk < extra ? 1 : 0)};
}

}  // namespace subexp
