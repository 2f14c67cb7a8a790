#include "alignlab/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "alignlab/alphabet.hpp"
#include "alignlab/error.hpp"

namespace alignlab {

namespace {

__extension__ typedef unsigned __int128 u128;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Distinct rewards among positive-mass symbols, ascending, with their total mass.
struct RewardLevels {
  std::vector<double> reward;
  std::vector<double> mass;
  std::vector<int> level_of;  // -1 for zero-mass symbols
};

RewardLevels reward_levels(std::span<const double> p, std::span<const double> r) {
  if (p.size() != r.size()) throw DimensionError("reward/distribution size mismatch");
  std::map<double, double> by_reward;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) by_reward[r[i]] += p[i];
  }
  if (by_reward.empty()) throw DomainError("distribution has no mass");
  RewardLevels out;
  for (const auto& [reward, mass] : by_reward) {
    out.reward.push_back(reward);
    out.mass.push_back(mass);
  }
  out.level_of.assign(p.size(), -1);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      auto it = std::lower_bound(out.reward.begin(), out.reward.end(), r[i]);
      out.level_of[i] = static_cast<int>(it - out.reward.begin());
    }
  }
  return out;
}

void require_positive_n(int n) {
  if (n < 1) throw DomainError("number of candidates n must be at least 1");
}

// Walks every count vector of `draws` companions over the reward levels and
// accumulates E[w * selection probability] per level.
class CompositionWalker {
 public:
  CompositionWalker(const RewardLevels& levels, double lambda, int draws)
      : draws_(draws), count_(levels.reward.size(), 0), acc_(levels.reward.size(), 0.0L) {
    const double top = levels.reward.back();
    for (std::size_t l = 0; l < levels.reward.size(); ++l) {
      log_mass_.push_back(std::log(levels.mass[l]));
      // Shifted so every exponent is <= 0.
      log_weight_.push_back((levels.reward[l] - top) / lambda);
    }
    log_factorial_.resize(static_cast<std::size_t>(draws) + 1);
    for (int k = 0; k <= draws; ++k) log_factorial_[k] = std::lgamma(k + 1.0);
    double total = 0.0;
    for (double m : levels.mass) total += m;
    log_total_mass_ = std::log(total);
  }

  std::vector<long double> run() {
    visit(0, draws_, log_factorial_[draws_] - draws_ * log_total_mass_);
    return acc_;
  }

 private:
  void visit(std::size_t level, int remaining, double log_coeff) {
    const std::size_t last = count_.size() - 1;
    if (level == last) {
      count_[level] = remaining;
      leaf(log_coeff + term(level, remaining));
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      count_[level] = c;
      visit(level + 1, remaining - c, log_coeff + term(level, c));
    }
  }

  double term(std::size_t level, int c) const {
    if (c == 0) return 0.0;
    return c * log_mass_[level] - log_factorial_[c];
  }

  void leaf(double log_coeff) {
    const long double w = std::exp(static_cast<long double>(log_coeff));
    // log sum_l c_l e^{a_l}
    double hi = -kInf;
    for (std::size_t l = 0; l < count_.size(); ++l) {
      if (count_[l] > 0) hi = std::max(hi, log_weight_[l]);
    }
    if (hi == -kInf) {
      for (std::size_t x = 0; x < count_.size(); ++x) acc_[x] += w;
      return;
    }
    double s = 0.0;
    for (std::size_t l = 0; l < count_.size(); ++l) {
      if (count_[l] > 0) s += count_[l] * std::exp(log_weight_[l] - hi);
    }
    for (std::size_t x = 0; x < count_.size(); ++x) {
      const double select = 1.0 / (1.0 + s * std::exp(hi - log_weight_[x]));
      acc_[x] += w * select;
    }
  }

  int draws_;
  std::vector<int> count_;
  std::vector<long double> acc_;
  std::vector<double> log_mass_;
  std::vector<double> log_weight_;
  std::vector<double> log_factorial_;
  double log_total_mass_ = 0.0;
};

}  // namespace

void SamplingPolicy::validate() const { require_positive_n(n); }

std::uint64_t composition_count(std::uint64_t draws, std::uint64_t levels) {
  if (levels == 0) return 0;
  // C(draws + k, k) with k = levels - 1, built incrementally; each partial
  // product is itself a binomial coefficient so the division is exact.
  const std::uint64_t k = levels - 1;
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  u128 value = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    value = value * (draws + i) / i;
    if (value > kMax) return kMax;
  }
  return static_cast<std::uint64_t>(value);
}

namespace kernel {

std::vector<double> soft_bon(std::span<const double> p, std::span<const double> r,
                             double lambda, int n, const EnumerationBudget& budget) {
  require_positive_n(n);
  if (!(lambda > 0.0)) throw DomainError("temperature must be strictly positive");
  const RewardLevels levels = reward_levels(p, r);
  const auto draws = static_cast<std::uint64_t>(n - 1);
  const std::uint64_t terms = composition_count(draws, levels.reward.size());
  if (terms > budget.max_terms) {
    throw BudgetError("exact soft best-of-n needs " + std::to_string(terms) +
                          " count vectors (n = " + std::to_string(n) + ", " +
                          std::to_string(levels.reward.size()) + " reward levels), budget is " +
                          std::to_string(budget.max_terms),
                      terms, budget.max_terms);
  }
  CompositionWalker walker(levels, lambda, n - 1);
  const std::vector<long double> expected_select = walker.run();
  std::vector<double> out(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const int l = levels.level_of[i];
    if (l < 0) continue;
    out[i] = static_cast<double>(static_cast<long double>(n) * p[i] * expected_select[l]);
  }
  return out;
}

std::vector<double> bon(std::span<const double> p, std::span<const double> r, int n) {
  require_positive_n(n);
  const RewardLevels levels = reward_levels(p, r);
  double total = 0.0;
  for (double m : levels.mass) total += m;
  std::vector<double> level_prob(levels.mass.size());
  double below = 0.0;
  double cdf_left = 0.0;
  for (std::size_t l = 0; l < levels.mass.size(); ++l) {
    below += levels.mass[l];
    const double cdf = (l + 1 == levels.mass.size()) ? 1.0 : below / total;
    level_prob[l] = std::pow(cdf, n) - std::pow(cdf_left, n);
    cdf_left = cdf;
  }
  std::vector<double> out(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const int l = levels.level_of[i];
    if (l < 0) continue;
    out[i] = level_prob[l] * p[i] / levels.mass[l];
  }
  return out;
}

}  // namespace kernel

FiniteDistribution exact_soft_bon(const FiniteDistribution& p, const RewardFunction& r,
                                  Temperature lam, int n, const EnumerationBudget& budget) {
  require_aligned(p, r);
  return FiniteDistribution::on_alphabet_of(
      p, kernel::soft_bon(p.probs(), r.values(), lam.value(), n, budget), 1e-10);
}

FiniteDistribution exact_bon(const FiniteDistribution& p, const RewardFunction& r, int n) {
  require_aligned(p, r);
  return FiniteDistribution::on_alphabet_of(p, kernel::bon(p.probs(), r.values(), n));
}

FiniteDistribution exact_policy(const FiniteDistribution& p, const RewardFunction& r,
                                const SamplingPolicy& policy, const EnumerationBudget& budget) {
  policy.validate();
  if (policy.strategy == Strategy::BestOfN) return exact_bon(p, r, policy.n);
  return exact_soft_bon(p, r, policy.lam, policy.n, budget);
}

std::vector<double> soft_bon_jensen_lower_bound(const FiniteDistribution& p,
                                                const RewardFunction& r, Temperature lam,
                                                int n) {
  require_aligned(p, r);
  require_positive_n(n);
  const double lambda = lam.value();
  const double top = r.max();
  std::vector<double> shifted(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) shifted[i] = (r[i] - top) / lambda;
  const double log_mean = kernel::log_mgf(p.probs(), shifted, 1.0);
  const double log_n = std::log(static_cast<double>(n));
  const double companion =
      n == 1 ? -kInf : std::log(static_cast<double>(n - 1)) - log_n + log_mean;
  std::vector<double> out(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    const double denom = kernel::log_add_exp(shifted[i] - log_n, companion);
    out[i] = std::exp(std::log(p[i]) + shifted[i] - denom);
  }
  return out;
}

BinaryKlCoefficient binary_kl_closed_form(double p_success, Temperature lam, int n) {
  if (!(p_success > 0.0 && p_success < 1.0)) {
    throw DomainError("binary_kl_closed_form: p_success must lie in (0, 1)");
  }
  require_positive_n(n);
  // (e^{s} - 1) / (p e^{s} + 1 - p) rewritten with e^{-s} to stay finite for small lambda.
  const double s = 1.0 / lam.value();
  const double ratio = -std::expm1(-s) / (p_success + (1.0 - p_success) * std::exp(-s));
  const double coefficient = p_success * (1.0 - p_success) * ratio * ratio;
  return {coefficient / n, coefficient};
}

}  // namespace alignlab
