#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace mcsp {

/// Splits [0, n) into fixed chunks of `chunk` items and runs fn(chunk_index,
/// begin, end) for each, spreading chunks over `workers` threads. The chunk
/// boundaries depend only on n and chunk, never on the worker count, so any
/// per-chunk partial result reduced in chunk order is schedule-independent.
template <typename Fn>
void for_each_chunk(std::size_t n, std::size_t chunk, int workers, Fn&& fn) {
  if (n == 0) return;
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t chunks = (n + chunk - 1) / chunk;
  const auto run = [&](std::size_t c) { fn(c, c * chunk, std::min(n, (c + 1) * chunk)); };
  const std::size_t threads = std::min<std::size_t>(std::max(workers, 1), chunks);
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t c = t; c < chunks; c += threads) run(c);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline constexpr std::size_t kPixelChunk = 8192;

}  // namespace mcsp
