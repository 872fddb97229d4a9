#include "texloss/parallel.hpp"

#include <cstdlib>
#include <thread>
#include <vector>

namespace texloss {

int thread_count() {
  static const int cached = [] {
    if (const char* env = std::getenv("TEXLOSS_THREADS")) {
      char* end = nullptr;
      long v = std::strtol(env, &end, 10);
      if (end != env && *end == '\0' && v >= 1) {
        return static_cast<int>(v);
      }
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw >= 1 ? static_cast<int>(hw) : 1;
  }();
  return cached;
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  int workers = thread_count();
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  if (workers > n) workers = n;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    // Contiguous block [lo, hi) for worker w.
    int lo = static_cast<int>(static_cast<long>(n) * w / workers);
    int hi = static_cast<int>(static_cast<long>(n) * (w + 1) / workers);
    threads.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : threads) t.join();
}

}  // namespace texloss
