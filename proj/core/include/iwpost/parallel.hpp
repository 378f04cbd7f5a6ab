#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "iwpost/rng.hpp"

namespace iwpost {

/// Caps the worker count used by every parallel loop in the library.
/// 0 restores the default (hardware concurrency).
void set_max_threads(std::size_t n);
std::size_t max_threads();

/// Calls `body(begin, end)` on disjoint contiguous chunks covering [0, n).
/// Chunking varies with the thread count, so `body` must treat every index
/// independently of where its chunk starts.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

/// Replicates are grouped into fixed-size blocks; block b draws from
/// RngStream::substream(key, b). The block size is part of the reproducibility
/// contract: it fixes which random numbers each replicate sees.
inline constexpr std::size_t kReplicateBlock = 64;

/// Runs `draw(stream)` n times, replicate i using block i / kReplicateBlock in
/// sequence. Consumes exactly one u64 from `rng` (the substream key).
/// Output order is replicate order, independent of thread count.
template <class T, class Draw>
std::vector<T> replicate(std::size_t n, RngStream& rng, Draw&& draw) {
  const std::uint64_t key = rng.next_u64();
  std::vector<T> out(n);
  const std::size_t blocks = (n + kReplicateBlock - 1) / kReplicateBlock;
  parallel_for(blocks, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      RngStream stream = RngStream::substream(key, b);
      const std::size_t end = std::min(n, (b + 1) * kReplicateBlock);
      for (std::size_t i = b * kReplicateBlock; i < end; ++i) out[i] = draw(stream);
    }
  });
  return out;
}

}  // namespace iwpost
