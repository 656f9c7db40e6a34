#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace cpsband {

/// Counter-based pseudo-random stream.
///
/// The k-th output of a stream with key K is splitmix64(K + (k + 1) * gamma),
/// so a stream is fully determined by its key and how many values it has
/// produced. substream(i) derives an independent key by hashing (key, i); the
/// same (master seed, index path) always reproduces the same draws no matter
/// which thread consumes them.
///
/// Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t master_seed);

  RngStream substream(std::uint64_t index) const;

  result_type operator()() noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  double normal();

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  RngStream(std::uint64_t key, int /*tag*/) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace cpsband
