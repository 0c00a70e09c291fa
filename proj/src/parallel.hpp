#pragma once

#include <cstddef>
#include <thread>
#include <vector>

#include "qfnlos/types.hpp"

namespace qfnlos::detail {

/// Runs fn(begin, end) over a disjoint partition of [0, count). Each index is
/// processed exactly once, so results do not depend on the thread count.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const int threads = max_threads();
  if (threads <= 1 || count < 2048) {
    fn(std::size_t{0}, count);
    return;
  }
  const std::size_t nchunks = static_cast<std::size_t>(threads);
  const std::size_t chunk = (count + nchunks - 1) / nchunks;
  std::vector<std::thread> pool;
  pool.reserve(nchunks);
  for (std::size_t c = 0; c < nchunks; ++c) {
    const std::size_t begin = c * chunk;
    if (begin >= count) break;
    const std::size_t end = std::min(count, begin + chunk);
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace qfnlos::detail
