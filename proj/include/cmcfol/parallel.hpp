#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace cmcfol {

// Thread budget for embarrassingly parallel sweeps (leaf sampling, flow-line
// bundles). Capped by the CMCFOL_THREADS environment variable.
inline int thread_budget() {
  int hw = int(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("CMCFOL_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1 && cap < hw) hw = cap;
  }
  return hw;
}

// Runs fn(i) for i in [0, count). Work items write only their own slots, so
// results are deterministic regardless of the thread count.
inline void parallel_for(std::size_t count,
                         const std::function<void(std::size_t)>& fn) {
  int threads = thread_budget();
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  if (std::size_t(threads) > count) threads = int(count);
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (std::size_t i = t; i < count; i += threads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace cmcfol
