#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "alignlab/distribution.hpp"

namespace alignlab {

enum class Strategy { BestOfN, SoftBestOfN };

/// An inference-time sampler: how many candidates and how they are selected.
/// The temperature is ignored by best-of-n.
struct SamplingPolicy {
  Strategy strategy = Strategy::SoftBestOfN;
  int n = 1;
  Temperature lam{1.0};

  void validate() const;
};

/// Cap on the number of companion count vectors enumerated by the exact engine.
struct EnumerationBudget {
  std::uint64_t max_terms = 5'000'000;
};

/// Number of count vectors of `draws` draws over `levels` categories,
/// C(draws + levels - 1, levels - 1), saturating at UINT64_MAX.
std::uint64_t composition_count(std::uint64_t draws, std::uint64_t levels);

namespace kernel {

/// Exact soft best-of-n output masses. See exact_soft_bon.
std::vector<double> soft_bon(std::span<const double> p, std::span<const double> r,
                             double lambda, int n, const EnumerationBudget& budget);

/// Exact best-of-n output masses with uniform tie-breaking.
std::vector<double> bon(std::span<const double> p, std::span<const double> r, int n);

}  // namespace kernel

/// Law of the soft best-of-n output, computed exactly.
///
/// The n - 1 companion draws only enter through how many of them land on each
/// distinct reward level, so the expectation
///   P_{n,lambda}(x) = n P(x) E[ e^{r(x)/lambda} / (e^{r(x)/lambda} + sum_i e^{r(X_i)/lambda}) ]
/// is an exact finite sum over level count vectors weighted by multinomial
/// probabilities (accumulated through lgamma). Selection probabilities are
/// evaluated in the log domain so the result stays exact as lambda -> 0.
///
/// Throws BudgetError when the number of count vectors exceeds the budget.
FiniteDistribution exact_soft_bon(const FiniteDistribution& p, const RewardFunction& r,
                                  Temperature lam, int n, const EnumerationBudget& budget = {});

/// Law of the best-of-n output: [F(r(y))^n - F^-(r(y))^n] P(y) / P(r = r(y)).
FiniteDistribution exact_bon(const FiniteDistribution& p, const RewardFunction& r, int n);

/// Dispatches on the policy strategy.
FiniteDistribution exact_policy(const FiniteDistribution& p, const RewardFunction& r,
                                const SamplingPolicy& policy,
                                const EnumerationBudget& budget = {});

/// Per-symbol Jensen lower bound
///   P(x) e^{r(x)/lambda} / ((1/n) e^{r(x)/lambda} + ((n-1)/n) E_P[e^{r/lambda}]).
std::vector<double> soft_bon_jensen_lower_bound(const FiniteDistribution& p,
                                                const RewardFunction& r, Temperature lam,
                                                int n);

struct BinaryKlCoefficient {
  double leading_term;       // exact_coefficient / n
  double exact_coefficient;  // p(1-p)(e^{1/lambda}-1)^2 / (p e^{1/lambda} + 1 - p)^2
};

/// Leading-order KL between the tilted and soft best-of-n laws for the binary
/// instance P(1) = p_success, r(x) = 1{x = 1}.
BinaryKlCoefficient binary_kl_closed_form(double p_success, Temperature lam, int n);

}  // namespace alignlab
