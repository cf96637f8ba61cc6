#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "rbfim/types.hpp"

namespace rbfim {

// 0 means "all hardware threads".
inline int resolve_threads(int requested) {
  if (requested > 0) {
    return requested;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Calls body(i) for i in [0, n), distributing indices over worker threads. Bodies must only
// write to per-index state. The first exception thrown by any body is rethrown.
template <class Body>
void parallel_for(index_t n, int threads, Body&& body) {
  int workers = static_cast<int>(std::min<index_t>(resolve_threads(threads), n));
  if (workers <= 1) {
    for (index_t i = 0; i < n; ++i) {
      body(i);
    }
    return;
  }
  std::atomic<index_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (index_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) {
          error = std::current_exception();
        }
        next = n;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w) {
      pool.emplace_back(run);
    }
    run();
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

}  // namespace rbfim
