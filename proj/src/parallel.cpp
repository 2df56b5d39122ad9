#include "moran/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace moran {

namespace {
std::atomic<int> g_default_threads{0};
}

void set_default_threads(int threads) {
  g_default_threads.store(threads > 0 ? threads : 0);
}

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (int d = g_default_threads.load(); d > 0) return d;
  if (const char* env = std::getenv("MORAN_ASG_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  int threads) {
  if (n == 0) return;
  std::size_t workers = static_cast<std::size_t>(resolve_thread_count(threads));
  if (workers > n) workers = n;
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t lo = w * chunk;
    std::size_t hi = lo + chunk < n ? lo + chunk : n;
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace moran
