#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

namespace deformkit {

/// Worker count for data-parallel loops. DEFORMKIT_THREADS caps it;
/// 0 or unset means auto (hardware concurrency).
inline int worker_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("DEFORMKIT_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0 && cap < static_cast<long>(hw)) return static_cast<int>(cap);
  }
  return static_cast<int>(hw);
}

/// Static chunking over [begin, end). `fn(i)` must only touch state owned by
/// index i; results are identical for any worker count.
template <typename Fn>
void parallel_for(int begin, int end, Fn&& fn) {
  const int n = end - begin;
  if (n <= 0) return;
  const int workers = std::min(worker_count(), n);
  if (workers <= 1 || n < 64) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = begin + w * chunk;
    const int hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace deformkit
