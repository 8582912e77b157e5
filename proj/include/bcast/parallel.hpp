#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bcast {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs body(acc, i) for i in [0, count) on up to `threads` workers.
/// Work is cut into fixed blocks whose partial accumulators are merged in block
/// order, so floating-point sums do not depend on the thread count.
template <class Acc, class Body, class Merge>
Acc parallel_accumulate(std::int64_t count, int threads, const Acc& zero, Body body, Merge merge,
                        std::int64_t block = 256) {
  if (count <= 0) return zero;
  const std::int64_t blocks = (count + block - 1) / block;
  std::vector<Acc> partial(static_cast<std::size_t>(blocks), zero);
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto worker = [&] {
    for (;;) {
      const std::int64_t b = next.fetch_add(1);
      if (b >= blocks) return;
      try {
        Acc& acc = partial[static_cast<std::size_t>(b)];
        const std::int64_t end = std::min(count, (b + 1) * block);
        for (std::int64_t i = b * block; i < end; ++i) body(acc, i);
      } catch (...) {
        std::lock_guard<std::mutex> guard(failure_lock);
        if (!failure) failure = std::current_exception();
        next.store(blocks);
        return;
      }
    }
  };
  const int n = std::max(1, std::min<int>(resolve_threads(threads), static_cast<int>(blocks)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  Acc total = zero;
  for (auto& p : partial) merge(total, p);
  return total;
}

}  // namespace bcast
