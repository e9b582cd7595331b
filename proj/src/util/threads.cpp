#include "lemon/util/threads.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace lemon {

int thread_cap() {
  static int cap = [] {
    if (const char* e = std::getenv("LEMON_THREADS")) {
      const int v = std::atoi(e);
      if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
  }();
  return cap;
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn) {
  const int width = thread_cap();
  if (width <= 1 || n < 2) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int nthreads = static_cast<int>(std::min<std::int64_t>(width, n));
  pool.reserve(static_cast<size_t>(nthreads - 1));
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

}  // namespace lemon
