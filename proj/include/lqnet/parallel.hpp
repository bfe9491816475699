#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lqnet {

// Evaluates f(k) for k in [begin, end) on up to `threads` workers and returns
// the results in index order. Work is split into contiguous slices, so the
// output never depends on the thread count.
template <typename F>
auto parallel_map(std::size_t begin, std::size_t end, unsigned threads, F&& f) {
  using R = decltype(f(std::size_t{}));
  const std::size_t n = end > begin ? end - begin : 0;
  std::vector<R> out(n);
  const unsigned workers = static_cast<unsigned>(
      std::max<std::size_t>(1, std::min<std::size_t>(std::max(threads, 1u), n)));
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) out[k] = f(begin + k);
    return out;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = n * w / workers;
    const std::size_t hi = n * (w + 1) / workers;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t k = lo; k < hi; ++k) out[k] = f(begin + k);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace lqnet
