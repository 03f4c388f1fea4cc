#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace shiftscope::detail {

inline std::size_t resolve_threads(std::size_t requested, std::size_t tasks) {
  std::size_t n = requested == 0 ? std::thread::hardware_concurrency() : requested;
  n = std::max<std::size_t>(n, 1);
  return std::min(n, std::max<std::size_t>(tasks, 1));
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. Work is
/// handed out by index and every task writes its own slot, so results do
/// not depend on scheduling. The exception of the lowest failing index is
/// rethrown.
template <class Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
  const std::size_t workers = resolve_threads(threads, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::vector<std::exception_ptr> errors(count);
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace shiftscope::detail
