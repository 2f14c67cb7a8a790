#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "alignlab/block_model.hpp"
#include "alignlab/distribution.hpp"
#include "alignlab/exact.hpp"
#include "alignlab/sampler.hpp"

namespace alignlab {

/// Masses over X^m, sequences in lexicographic order of symbol indices
/// (the first position is the most significant digit).
class SequenceDistribution {
 public:
  SequenceDistribution(std::size_t alphabet_size, int m, std::vector<double> probs,
                       double tolerance = 1e-10);

  std::size_t alphabet_size() const noexcept { return alphabet_size_; }
  int m() const noexcept { return m_; }
  std::size_t size() const noexcept { return probs_.size(); }
  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  Sequence sequence(std::size_t index) const;
  double prob_of(std::span<const std::size_t> sequence) const;

 private:
  std::size_t alphabet_size_;
  int m_;
  std::vector<double> probs_;
};

/// The m-fold product P^{(x)m}.
SequenceDistribution product_source(const BlockModel& block);

/// m-fold product of an arbitrary symbol distribution.
SequenceDistribution product_of(const FiniteDistribution& p, int m);

/// (1/m) sum_i r(x_i). Throws DomainError for an unknown symbol or a wrong length.
double sequence_reward(const BlockModel& block, std::span<const std::size_t> sequence);

/// Sequence rewards for every sequence, in lexicographic order.
std::vector<double> sequence_rewards(const BlockModel& block);

/// The product source tilted by the sequence reward at temperature lambda.
/// Computed directly on the sequence alphabet, not through the factorization.
SequenceDistribution blockwise_tilt(const BlockModel& block, Temperature lam);

/// Exact law of blockwise soft best-of-n: the flat exact engine applied to
/// the sequence alphabet with sequence rewards.
SequenceDistribution exact_blockwise_soft_bon(const BlockModel& block, Temperature lam, int n,
                                              const EnumerationBudget& budget = {});

/// Exact law of blockwise best-of-n.
SequenceDistribution exact_blockwise_bon(const BlockModel& block, int n);

/// Exact law of symbolwise best-of-n (the product of per-position best-of-n laws).
SequenceDistribution exact_symbolwise_bon(const BlockModel& block, int n);

double kl_divergence(const SequenceDistribution& p, const SequenceDistribution& q);
double tv_distance(const SequenceDistribution& p, const SequenceDistribution& q);
double expected_sequence_reward(const SequenceDistribution& p, const BlockModel& block);

/// Symbolwise vs blockwise soft best-of-n at a matched operating point.
struct SymbolBlockComparison {
  int m = 1;
  int n = 1;
  double lambda_prime = 1.0;  // per-symbol temperature
  double lambda_block = 1.0;  // lambda_prime / m
  double kl_symbolwise = 0.0;  // KL(P*^{(x)m}_{lambda'} || (P_{n,lambda'})^{(x)m})
  double kl_blockwise = 0.0;   // KL(P*^{(x)m}_{lambda'} || P^m_{n,lambda'/m})
  double reward_symbolwise = 0.0;
  double reward_blockwise = 0.0;
  double reward_target = 0.0;
  double sample_complexity_n = 0.0;  // n sufficient for the blockwise route at eps
};

SymbolBlockComparison compare_symbolwise_blockwise(const BlockModel& block,
                                                   Temperature lambda_prime, int n,
                                                   double eps = 0.1,
                                                   const EnumerationBudget& budget = {});

}  // namespace alignlab
