#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "alignlab/block_model.hpp"
#include "alignlab/distribution.hpp"
#include "alignlab/rng.hpp"

// Monte Carlo samplers. Each draw takes its randomness from an explicit
// CounterRng, so a (config, seed) pair always yields the same samples.

namespace alignlab {

using Sequence = std::vector<std::size_t>;

/// Inverse-CDF categorical sampler over a fixed probability vector.
class CategoricalTable {
 public:
  explicit CategoricalTable(std::span<const double> probs);
  std::size_t draw(CounterRng& rng) const;
  std::size_t size() const noexcept { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

enum class SamplerKind {
  BestOfN,
  SoftBestOfN,
  BlockwiseSoftBestOfN,
  BlockwiseBestOfN,
  SymbolwiseBestOfN,
};

const char* to_string(SamplerKind kind);

/// What to sample. Symbol-level kinds ignore `model.m()`; the temperature is
/// only read by the soft kinds.
struct SamplerConfig {
  SamplerKind kind;
  BlockModel model;
  int n = 1;
  double lambda = 1.0;

  /// Symbol-level samplers draw single symbols; block-level ones draw whole
  /// sequences encoded lexicographically (first symbol most significant).
  bool draws_sequences() const noexcept;
  std::uint64_t outcome_count() const;
};

/// An immutable sampler built once from a config.
class Sampler {
 public:
  explicit Sampler(SamplerConfig config);

  /// One draw, as an outcome index in [0, outcome_count()).
  std::size_t draw_outcome(CounterRng& rng) const;

  /// One draw of a sequence (length 1 for symbol-level kinds).
  Sequence draw_sequence(CounterRng& rng) const;

  const SamplerConfig& config() const noexcept { return config_; }

 private:
  std::size_t best_of_n_symbol(CounterRng& rng) const;
  std::size_t soft_best_of_n_symbol(CounterRng& rng) const;
  void blockwise(CounterRng& rng, bool soft, Sequence& out) const;

  SamplerConfig config_;
  CategoricalTable table_;
  std::vector<double> scaled_reward_;  // r / lambda
};

std::size_t encode_sequence(std::span<const std::size_t> sequence, std::size_t alphabet_size);
Sequence decode_sequence(std::size_t index, std::size_t alphabet_size, int m);

/// Best-of-n: n i.i.d. draws, keep one of maximal reward (uniform among ties).
std::size_t sample_bon(const FiniteDistribution& p, const RewardFunction& r, int n,
                       RngSeed seed);

/// Soft best-of-n: n i.i.d. draws, index chosen by the softmax of r / lambda
/// (via Gumbel-max on the log-weights).
std::size_t sample_soft_bon(const FiniteDistribution& p, const RewardFunction& r,
                            Temperature lam, int n, RngSeed seed);

/// n i.i.d. length-m sequences, one chosen by the softmax of sequence reward / lambda.
Sequence sample_blockwise_soft_bon(const BlockModel& block, Temperature lam, int n,
                                   RngSeed seed);

/// n i.i.d. length-m sequences, one of maximal sequence reward.
Sequence sample_blockwise_bon(const BlockModel& block, int n, RngSeed seed);

/// Best-of-n run independently at each of the m positions.
Sequence sample_symbolwise_bon(const BlockModel& block, int n, RngSeed seed);

struct EmpiricalDistribution {
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  std::vector<double> frequencies() const;
};

/// Runs the configured sampler `draws` times; draw i uses stream seed.stream + i.
/// The result does not depend on `workers`.
EmpiricalDistribution estimate_distribution(const SamplerConfig& config, std::uint64_t draws,
                                            RngSeed seed, unsigned workers = 1);

}  // namespace alignlab
