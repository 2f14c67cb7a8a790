#pragma once

#include <cstdint>

namespace alignlab {

/// Identifies one random stream: (seed, stream) fully determines the draws.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Counter-based generator: the k-th output of stream (seed, stream) is
/// splitmix64(key + k * golden), with key a mix of seed and stream. Any draw
/// of any stream can be produced without touching other streams, which is
/// what makes parallel estimation reproducible.
///
/// The output sequence is part of the release contract; changing the mixing
/// constants changes every recorded experiment.
class CounterRng {
 public:
  explicit CounterRng(RngSeed seed);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform on (0, 1).
  double open_uniform();

  /// Standard Gumbel variate, -log(-log U).
  double gumbel();

  /// Uniform integer in [0, bound), bound >= 1.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace alignlab
