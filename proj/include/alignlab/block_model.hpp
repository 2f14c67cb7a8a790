#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "alignlab/distribution.hpp"

namespace alignlab {

/// Largest sequence alphabet K^m that is ever materialized.
inline constexpr std::uint64_t kMaxSequences = 1'000'000;

/// An i.i.d. source over length-m sequences with the additive (mean) reward
/// r(x^m) = (1/m) sum_i r(x_i).
class BlockModel {
 public:
  BlockModel(FiniteDistribution base, RewardFunction reward, int m);

  const FiniteDistribution& base() const noexcept { return base_; }
  const RewardFunction& reward() const noexcept { return reward_; }
  int m() const noexcept { return m_; }
  std::size_t alphabet_size() const noexcept { return base_.size(); }

  /// K^m, saturating at UINT64_MAX.
  std::uint64_t sequence_count() const noexcept;

  /// Throws BudgetError when K^m exceeds kMaxSequences.
  void require_materializable() const;

  /// Mean reward of a sequence of symbol indices. Computed from symbol counts
  /// so every permutation of a sequence gets a bit-identical value.
  double reward_of(std::span<const std::size_t> sequence) const;

 private:
  FiniteDistribution base_;
  RewardFunction reward_;
  int m_;
};

}  // namespace alignlab
