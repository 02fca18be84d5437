#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace brightfuse {

/// Number of worker threads to use; 0 means hardware concurrency.
inline int resolve_threads(int threads) {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(begin, end) over contiguous chunks of [0, count). Every chunk is
/// independent, so results do not depend on the thread count.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  const int workers = std::min(resolve_threads(threads), std::max(count, 1));
  if (workers <= 1) {
    fn(0, count);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const int chunk = (count + workers - 1) / workers;
  for (int begin = 0; begin < count; begin += chunk) {
    const int end = std::min(count, begin + chunk);
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
}

}  // namespace brightfuse
