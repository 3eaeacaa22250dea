#include "respotopt/util.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace respotopt {

int thread_cap() {
  static const int cap = [] {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    int n = std::min(hw, 8);
    if (const char* env = std::getenv("RESPOTOPT_THREADS")) {
      const int v = std::atoi(env);
      if (v >= 1) n = std::min(v, hw);
    }
    return n;
  }();
  return cap;
}

void parallel_for(int n, const std::function<void(int, int)>& fn) {
  if (n <= 0) return;
  const int threads = std::min(thread_cap(), n);
  if (threads <= 1 || n < 4096) {
    fn(0, n);
    return;
  }
  const int chunk = (n + threads - 1) / threads;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const int begin = t * chunk;
    const int end = std::min(begin + chunk, n);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace respotopt
