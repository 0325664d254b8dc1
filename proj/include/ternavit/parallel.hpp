#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ternavit {

// Worker count: TERNAVIT_THREADS env override, else hardware concurrency.
unsigned hardware_threads();

// Splits [begin, end) into up to `threads` contiguous chunks and runs
// fn(chunk_begin, chunk_end) on each. The first exception thrown by any
// worker is rethrown on the calling thread.
template <typename Fn>
void parallel_chunks(std::size_t begin, std::size_t end, unsigned threads, Fn&& fn) {
  if (end <= begin) return;
  const std::size_t n = end - begin;
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(n, std::max(1u, threads)));
  if (workers <= 1) {
    fn(begin, end);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr err;
  std::mutex err_mu;
  for (unsigned t = 0; t < workers; ++t) {
    const std::size_t lo = begin + static_cast<std::size_t>(t) * chunk;
    if (lo >= end) break;
    const std::size_t hi = std::min(end, lo + chunk);
    pool.emplace_back([lo, hi, &fn, &err, &err_mu] {
      try {
        fn(lo, hi);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace ternavit
