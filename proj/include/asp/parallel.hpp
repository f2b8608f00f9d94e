#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace asp {

// Runs fn(i) for i in [0, count) on up to `threads` workers, each owning a
// contiguous stripe. Work items must not share mutable state; results are
// identical for any thread count because every item is computed the same way.
inline void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (threads > count) threads = count;
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    int begin = static_cast<int>(static_cast<long long>(count) * w / threads);
    int end = static_cast<int>(static_cast<long long>(count) * (w + 1) / threads);
    workers.emplace_back([begin, end, &fn] {
      for (int i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : workers) t.join();
}

}  // namespace asp
