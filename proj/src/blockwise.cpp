#include "alignlab/blockwise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "alignlab/alphabet.hpp"
#include "alignlab/bounds.hpp"
#include "alignlab/error.hpp"

namespace alignlab {

// ---------------------------------------------------------------------------
// BlockModel

BlockModel::BlockModel(FiniteDistribution base, RewardFunction reward, int m)
    : base_(std::move(base)), reward_(std::move(reward)), m_(m) {
  if (m_ < 1) throw DomainError("block length m must be at least 1");
  require_aligned(base_, reward_);
}

std::uint64_t BlockModel::sequence_count() const noexcept {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t count = 1;
  const std::uint64_t k = base_.size();
  for (int i = 0; i < m_; ++i) {
    if (count > kMax / k) return kMax;
    count *= k;
  }
  return count;
}

void BlockModel::require_materializable() const {
  const std::uint64_t count = sequence_count();
  if (count > kMaxSequences) {
    throw BudgetError("sequence alphabet K^m = " + std::to_string(count) +
                          " exceeds the limit of " + std::to_string(kMaxSequences),
                      count, kMaxSequences);
  }
}

double BlockModel::reward_of(std::span<const std::size_t> sequence) const {
  // Summing in sorted symbol order makes the value permutation invariant.
  thread_local std::vector<std::size_t> sorted;
  sorted.assign(sequence.begin(), sequence.end());
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (std::size_t x : sorted) total += reward_[x];
  return total / static_cast<double>(sequence.size());
}

// ---------------------------------------------------------------------------
// SequenceDistribution

SequenceDistribution::SequenceDistribution(std::size_t alphabet_size, int m,
                                           std::vector<double> probs, double tolerance)
    : alphabet_size_(alphabet_size), m_(m), probs_(std::move(probs)) {
  if (m_ < 1 || alphabet_size_ < 1) throw DomainError("empty sequence alphabet");
  std::size_t expected = 1;
  for (int i = 0; i < m_; ++i) expected *= alphabet_size_;
  if (probs_.size() != expected) {
    throw DimensionError("sequence distribution has " + std::to_string(probs_.size()) +
                         " masses, expected K^m = " + std::to_string(expected));
  }
  double total = 0.0;
  for (double v : probs_) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("negative or non-finite sequence mass");
    total += v;
  }
  if (std::abs(total - 1.0) > tolerance) {
    throw DomainError("sequence masses sum to " + std::to_string(total) + ", not 1");
  }
}

Sequence SequenceDistribution::sequence(std::size_t index) const {
  return decode_sequence(index, alphabet_size_, m_);
}

double SequenceDistribution::prob_of(std::span<const std::size_t> sequence) const {
  if (sequence.size() != static_cast<std::size_t>(m_)) {
    throw DimensionError("sequence length does not match block length");
  }
  return probs_[encode_sequence(sequence, alphabet_size_)];
}

// ---------------------------------------------------------------------------
// operations

SequenceDistribution product_of(const FiniteDistribution& p, int m) {
  BlockModel shape(p, RewardFunction(std::vector<double>(p.size(), 0.0)), m);
  shape.require_materializable();
  std::vector<double> probs{1.0};
  for (int pos = 0; pos < m; ++pos) {
    std::vector<double> next(probs.size() * p.size());
    for (std::size_t j = 0; j < probs.size(); ++j) {
      for (std::size_t k = 0; k < p.size(); ++k) next[j * p.size() + k] = probs[j] * p[k];
    }
    probs = std::move(next);
  }
  return SequenceDistribution(p.size(), m, std::move(probs));
}

SequenceDistribution product_source(const BlockModel& block) {
  return product_of(block.base(), block.m());
}

double sequence_reward(const BlockModel& block, std::span<const std::size_t> sequence) {
  if (sequence.size() != static_cast<std::size_t>(block.m())) {
    throw DomainError("sequence length " + std::to_string(sequence.size()) +
                      " does not match block length " + std::to_string(block.m()));
  }
  for (std::size_t x : sequence) {
    if (x >= block.alphabet_size()) {
      throw DomainError("symbol index " + std::to_string(x) + " is not in the alphabet");
    }
  }
  return block.reward_of(sequence);
}

std::vector<double> sequence_rewards(const BlockModel& block) {
  block.require_materializable();
  const auto count = static_cast<std::size_t>(block.sequence_count());
  std::vector<double> out(count);
  Sequence seq(static_cast<std::size_t>(block.m()), 0);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = block.reward_of(seq);
    // Lexicographic increment.
    for (int pos = block.m() - 1; pos >= 0; --pos) {
      auto& digit = seq[static_cast<std::size_t>(pos)];
      if (++digit < block.alphabet_size()) break;
      digit = 0;
    }
  }
  return out;
}

SequenceDistribution blockwise_tilt(const BlockModel& block, Temperature lam) {
  const SequenceDistribution source = product_source(block);
  const std::vector<double> rewards = sequence_rewards(block);
  return SequenceDistribution(block.alphabet_size(), block.m(),
                              kernel::tilt(source.probs(), rewards, lam.value()));
}

SequenceDistribution exact_blockwise_soft_bon(const BlockModel& block, Temperature lam, int n,
                                              const EnumerationBudget& budget) {
  const SequenceDistribution source = product_source(block);
  const std::vector<double> rewards = sequence_rewards(block);
  return SequenceDistribution(block.alphabet_size(), block.m(),
                              kernel::soft_bon(source.probs(), rewards, lam.value(), n, budget));
}

SequenceDistribution exact_blockwise_bon(const BlockModel& block, int n) {
  const SequenceDistribution source = product_source(block);
  const std::vector<double> rewards = sequence_rewards(block);
  return SequenceDistribution(block.alphabet_size(), block.m(),
                              kernel::bon(source.probs(), rewards, n));
}

SequenceDistribution exact_symbolwise_bon(const BlockModel& block, int n) {
  return product_of(exact_bon(block.base(), block.reward(), n), block.m());
}

namespace {
void require_same_shape(const SequenceDistribution& p, const SequenceDistribution& q) {
  if (p.alphabet_size() != q.alphabet_size() || p.m() != q.m()) {
    throw DimensionError("sequence distributions over different alphabets");
  }
}
}  // namespace

double kl_divergence(const SequenceDistribution& p, const SequenceDistribution& q) {
  require_same_shape(p, q);
  return kernel::kl_divergence(p.probs(), q.probs());
}

double tv_distance(const SequenceDistribution& p, const SequenceDistribution& q) {
  require_same_shape(p, q);
  return kernel::tv_distance(p.probs(), q.probs());
}

double expected_sequence_reward(const SequenceDistribution& p, const BlockModel& block) {
  if (p.alphabet_size() != block.alphabet_size() || p.m() != block.m()) {
    throw DimensionError("sequence distribution does not match the block model");
  }
  return kernel::dot(p.probs(), sequence_rewards(block));
}

SymbolBlockComparison compare_symbolwise_blockwise(const BlockModel& block,
                                                   Temperature lambda_prime, int n, double eps,
                                                   const EnumerationBudget& budget) {
  const int m = block.m();
  const Temperature lambda_block(lambda_prime.value() / m);
  const SequenceDistribution target =
      product_of(tilt(block.base(), block.reward(), lambda_prime), m);
  const SequenceDistribution symbolwise =
      product_of(exact_soft_bon(block.base(), block.reward(), lambda_prime, n, budget), m);
  const SequenceDistribution blockwise = exact_blockwise_soft_bon(block, lambda_block, n, budget);

  SymbolBlockComparison out;
  out.m = m;
  out.n = n;
  out.lambda_prime = lambda_prime.value();
  out.lambda_block = lambda_block.value();
  out.kl_symbolwise = kl_divergence(target, symbolwise);
  out.kl_blockwise = kl_divergence(target, blockwise);
  out.reward_symbolwise = expected_sequence_reward(symbolwise, block);
  out.reward_blockwise = expected_sequence_reward(blockwise, block);
  out.reward_target = expected_sequence_reward(target, block);
  out.sample_complexity_n = sample_complexity_match(lambda_prime.value(), eps, m);
  return out;
}

}  // namespace alignlab
