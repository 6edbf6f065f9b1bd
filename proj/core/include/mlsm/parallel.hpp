#pragma once

#include <cstddef>
#include <functional>

namespace mlsm {

// Number of worker threads used by parallel_for. Defaults to the hardware
// concurrency (at least 1). Results of every library routine are independent
// of this value.
std::size_t worker_threads() noexcept;
void set_worker_threads(std::size_t n) noexcept;

/// Splits [0, n) into at most worker_threads() contiguous blocks and calls
/// body(begin, end) for each block, one block per thread. The first exception
/// thrown by any block is rethrown on the calling thread after all blocks join.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_block = 64);

}  // namespace mlsm
