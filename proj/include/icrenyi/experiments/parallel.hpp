#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace icrenyi::experiments {

/// Calls fn(i) for i in [0, n) on up to `jobs` threads. Each index runs
/// exactly once; the first exception is rethrown after all workers stop.
template <class Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
  jobs = std::clamp(jobs, 1, std::max(n, 1));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex m;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(m);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace icrenyi::experiments
