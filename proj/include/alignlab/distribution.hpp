#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace alignlab {

/// Absolute tolerance on the total mass of a validated distribution.
inline constexpr double kMassTolerance = 1e-12;

/// Probability vector over a named, ordered finite alphabet.
///
/// The symbol list is shared between distributions derived from one another
/// (tilting, best-of-n outputs) so alphabet comparisons are usually a pointer
/// check. Values are immutable after construction.
class FiniteDistribution {
 public:
  /// Validates that symbols are unique, probabilities are finite and
  /// nonnegative, and that they sum to one within `tolerance`.
  FiniteDistribution(std::vector<std::string> symbols, std::vector<double> probs,
                     double tolerance = kMassTolerance);

  /// Distribution over the symbols "0", "1", ..., "K-1".
  static FiniteDistribution from_probs(std::vector<double> probs,
                                       double tolerance = kMassTolerance);

  /// Same alphabet as `like`, new masses.
  static FiniteDistribution on_alphabet_of(const FiniteDistribution& like,
                                           std::vector<double> probs,
                                           double tolerance = kMassTolerance);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }
  const std::vector<std::string>& symbols() const noexcept { return *symbols_; }
  const std::string& symbol(std::size_t i) const { return (*symbols_)[i]; }
  std::optional<std::size_t> index_of(const std::string& symbol) const;

  bool same_alphabet(const FiniteDistribution& other) const;

 private:
  FiniteDistribution(std::shared_ptr<const std::vector<std::string>> symbols,
                     std::vector<double> probs, double tolerance);
  void validate(double tolerance) const;

  std::shared_ptr<const std::vector<std::string>> symbols_;
  std::vector<double> probs_;
};

/// Real-valued reward per symbol, aligned index-for-index with an alphabet.
class RewardFunction {
 public:
  explicit RewardFunction(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  double min() const;
  double max() const;

  /// True when every reward lies in [0, 1].
  bool in_unit_interval() const;

 private:
  std::vector<double> values_;
};

/// Strictly positive, finite temperature.
class Temperature {
 public:
  explicit Temperature(double lambda);
  double value() const noexcept { return lambda_; }

 private:
  double lambda_;
};

/// Throws DimensionError unless the reward is aligned with the distribution.
void require_aligned(const FiniteDistribution& p, const RewardFunction& r);

/// Throws PreconditionError naming the first symbol whose reward leaves [0, 1].
void require_unit_rewards(const FiniteDistribution& p, const RewardFunction& r);

}  // namespace alignlab
