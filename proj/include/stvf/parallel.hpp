#pragma once

#include <atomic>
#include <exception>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace stvf {

/// Evaluates fn(0..count-1) across up to `threads` workers and returns the
/// results in index order. Work items must not share mutable state; results
/// are therefore identical for every worker count. The first failure (by
/// index) is rethrown after all workers finish.
template <class Fn>
auto run_indexed(int count, int threads, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, int>> {
  using R = std::invoke_result_t<Fn&, int>;
  std::vector<std::optional<R>> slots(static_cast<std::size_t>(count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};

  auto worker = [&] {
    for (;;) {
      const int m = next.fetch_add(1);
      if (m >= count) return;
      try {
        slots[static_cast<std::size_t>(m)].emplace(fn(m));
      } catch (...) {
        errors[static_cast<std::size_t>(m)] = std::current_exception();
      }
    }
  };

  if (threads <= 1 || count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int n_workers = std::min(threads, count);
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  std::vector<R> out;
  out.reserve(static_cast<std::size_t>(count));
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

}  // namespace stvf
