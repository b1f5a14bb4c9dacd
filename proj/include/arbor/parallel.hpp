#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace arbor {

/// Runs body(i) for i in [begin, end) over at most `jobs` threads using
/// static contiguous chunks. Callers must write to disjoint outputs.
template <typename Body>
void parallel_for(int begin, int end, int jobs, Body&& body) {
  const int n = end - begin;
  if (n <= 0) return;
  const int workers = std::clamp(jobs, 1, n);
  if (workers == 1) {
    for (int i = begin; i < end; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      const int lo = begin + static_cast<int>(static_cast<long long>(n) * w / workers);
      const int hi = begin + static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
      threads.emplace_back([&, lo, hi] {
        try {
          for (int i = lo; i < hi; ++i) body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace arbor
