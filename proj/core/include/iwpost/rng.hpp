#pragma once

#include <cstdint>
#include <random>

namespace iwpost {

/// A seeded random stream. Never shared between threads: parallel code derives
/// independent substreams from a key drawn off the parent, so results depend only
/// on the root seed and never on scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  double normal();
  /// Uniform on [0, 1).
  double uniform();
  std::uint64_t next_u64();

  /// Substream `index` of the family keyed by `key`. Pure function of (key, index).
  static RngStream substream(std::uint64_t key, std::uint64_t index);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace iwpost
