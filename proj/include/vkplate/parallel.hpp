#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace vkplate {

/// Worker count for element loops: VKPLATE_THREADS, default 1.
inline int thread_count() {
  const char* env = std::getenv("VKPLATE_THREADS");
  if (env == nullptr) return 1;
  try {
    const int n = std::stoi(env);
    return std::clamp(n, 1, 256);
  } catch (const std::exception&) {
    return 1;
  }
}

/// Runs fn(i) for i in [0, n) in contiguous static chunks. Callers write only
/// to per-index slots, so the result does not depend on the thread count.
template <typename Fn>
void parallel_for(int n, Fn&& fn, int threads = thread_count()) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int begin = t * chunk;
    const int end = std::min(n, begin + chunk);
    pool.emplace_back([begin, end, &fn] {
      for (int i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace vkplate
