#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace envnet {

/// Default worker count: ENVNET_THREADS if set, otherwise 1.
inline int default_threads() {
  if (const char* env = std::getenv("ENVNET_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

/// Runs fn(i) for i in [0, n). Each call owns its output slot, so results are
/// independent of the thread schedule; reductions happen afterwards in index
/// order.
template <typename F>
void for_each_replica(long n, int threads, F&& fn) {
  if (n <= 0) return;
  if (threads <= 1 || n == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = static_cast<int>(std::min<long>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&fn, n, w, workers] {
      for (long i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace envnet
