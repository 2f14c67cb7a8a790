#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "alignlab/block_model.hpp"
#include "alignlab/distribution.hpp"
#include "alignlab/exact.hpp"
#include "alignlab/rng.hpp"

// Every convergence statement about soft best-of-n turned into a checkable
// inequality lhs <= rhs on a concrete instance.

namespace alignlab {

inline constexpr double kBoundSlack = 1e-12;

/// Monte Carlo audits allow this many binomial standard errors of slack.
inline constexpr double kStatisticalSlackSigmas = 3.0;

struct BoundReport {
  std::string bound_name;
  double lhs = 0.0;     // quantity being bounded
  double rhs = 0.0;     // bound value
  double margin = 0.0;  // rhs - lhs
  bool holds = false;   // lhs <= rhs + kBoundSlack
  std::string instance_digest;
  std::string note;
};

BoundReport make_report(std::string name, double lhs, double rhs, std::string digest,
                        std::string note = {});

/// FNV-1a over the exact bit patterns of the audited inputs.
class InstanceDigest {
 public:
  InstanceDigest& add(std::uint64_t value);
  InstanceDigest& add(double value);
  InstanceDigest& add(int value) { return add(static_cast<std::uint64_t>(value)); }
  InstanceDigest& add(std::span<const double> values);
  InstanceDigest& add(const std::string& text);
  std::string hex() const;

 private:
  void mix_byte(unsigned char byte);
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string digest_of(const std::string& bound, const FiniteDistribution& p,
                      const RewardFunction& r, double lambda, int n);
std::string digest_of(const std::string& bound, const BlockModel& block, double lambda, int n);

// --- bound values -------------------------------------------------------------
// Right-hand sides alone, for callers that already hold the exact laws. The
// [0, 1] forms throw PreconditionError naming the offending symbol.

double kl_upper_bound(const FiniteDistribution& p, const RewardFunction& r, Temperature lam,
                      int n);
double sinh_upper_bound(const FiniteDistribution& p, const RewardFunction& r, Temperature lam,
                        int n);
/// M / (M + n); also checks that rewards lie in [0, 1].
double relative_reward_bound(const FiniteDistribution& p, const RewardFunction& r,
                             Temperature lam, int n);
/// Relative reward gap of q against the tilted law; DomainError when the
/// tilted expected reward is zero.
double relative_reward_gap(const FiniteDistribution& tilted, const FiniteDistribution& q,
                           const RewardFunction& r);

double blockwise_kl_stated_bound(const BlockModel& block, Temperature lam, int n);
double blockwise_sinh_stated_bound(const BlockModel& block, Temperature lam, int n);
double blockwise_product_moment_bound(const BlockModel& block, Temperature lam, int n);
double blockwise_cosh_bound(const BlockModel& block, Temperature lam, int n);

// --- single-symbol soft best-of-n ------------------------------------------

/// D_KL(P*_lambda || P_{n,lambda}) <= log(1 + CV(e^{r/lambda})^2 / n).
BoundReport audit_kl_upper(const FiniteDistribution& p, const RewardFunction& r,
                           Temperature lam, int n, const EnumerationBudget& budget = {});

/// D_KL(P*_lambda || P_{n,lambda}) <= sinh(1/(2 lambda))^2 / n for rewards in [0, 1].
/// Throws PreconditionError naming the offending symbol otherwise.
BoundReport audit_sinh_upper(const FiniteDistribution& p, const RewardFunction& r,
                             Temperature lam, int n, const EnumerationBudget& budget = {});

/// The CV form never exceeds the sinh form: lhs = CV bound, rhs = sinh bound.
BoundReport audit_cv_within_sinh(const FiniteDistribution& p, const RewardFunction& r,
                                 Temperature lam, int n);

/// 1 / log(1 + 4 n eps): temperatures at least this large keep the KL below eps.
double lambda_threshold(int n, double eps);

/// Exact KL at lambda = lambda_threshold(n, eps) against eps.
BoundReport audit_lambda_threshold(const FiniteDistribution& p, const RewardFunction& r, int n,
                                   double eps, const EnumerationBudget& budget = {});

/// Relative reward gap (E_{P*}[r] - E_{P_n}[r]) / E_{P*}[r] <= M / (M + n),
/// M = e^{1/lambda} / E_P[e^{r/lambda}] - 1. Rewards must lie in [0, 1] and the
/// tilted expected reward must be positive.
BoundReport audit_relative_reward(const FiniteDistribution& p, const RewardFunction& r,
                                  Temperature lam, int n, const EnumerationBudget& budget = {});

/// KL >= 2 TV^2 between the tilted and exact soft best-of-n laws
/// (lhs = 2 TV^2, rhs = KL).
BoundReport audit_pinsker(const FiniteDistribution& p, const RewardFunction& r,
                          Temperature lam, int n, const EnumerationBudget& budget = {});

// --- rates ------------------------------------------------------------------

struct RateFit {
  std::vector<std::pair<double, double>> grid;  // (n, value)
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least-squares line through (log n, log value). Needs at least four points
/// with strictly increasing n and strictly positive values.
RateFit fit_rate(std::vector<std::pair<double, double>> grid);

// --- blockwise ----------------------------------------------------------------

/// Blockwise KL against the stated bound
///   log(1 + (1/n) (E[e^{2r/(m lambda)}] / E[e^{r/(m lambda)}]^2 - 1)^m).
BoundReport audit_blockwise_kl(const BlockModel& block, Temperature lam, int n,
                               const EnumerationBudget& budget = {});

/// Blockwise KL against the stated hyperbolic form sinh(1/(m lambda))^{2m} / n.
BoundReport audit_blockwise_sinh(const BlockModel& block, Temperature lam, int n,
                                 const EnumerationBudget& budget = {});

/// Blockwise KL against log(1 + ((1 + c)^m - 1) / n), c the per-symbol CV^2 at
/// temperature m lambda. This is the single-symbol bound applied to the
/// sequence alphabet, with the block moment ratio factorized exactly.
BoundReport audit_blockwise_product_moment(const BlockModel& block, Temperature lam, int n,
                                           const EnumerationBudget& budget = {});

/// Blockwise KL against log(1 + (cosh(1/(2 m lambda))^{2m} - 1) / n), the
/// product-moment bound with Bhatia-Davis applied per symbol. Rewards in [0, 1].
BoundReport audit_blockwise_cosh(const BlockModel& block, Temperature lam, int n,
                                 const EnumerationBudget& budget = {});

/// 2 / log(1 + 4 (n eps)^{1/m}).
double blockwise_lambda_threshold(int n, double eps, int m);

/// Exact blockwise KL at lambda = blockwise_lambda_threshold(n, eps, m) against eps.
BoundReport audit_blockwise_lambda_threshold(const BlockModel& block, int n, double eps,
                                             const EnumerationBudget& budget = {});

/// (1/eps) ((e^{2/lambda'} - 1) / 4)^m.
double sample_complexity_match(double lambda_prime, double eps, int m);

/// Monte Carlo estimate of Pr(r(Y^m) >= mu + sqrt(alpha log n / (2m))) under
/// blockwise best-of-n against 1 - (1 - n^{-alpha})^n plus statistical slack.
BoundReport audit_blockwise_bon_ceiling(const BlockModel& block, int n, double alpha,
                                        std::uint64_t draws, RngSeed seed,
                                        unsigned workers = 1);

/// Binary-reward symbolwise best-of-n: p_n = 1 - (1 - mu)^n and two tails for
/// Pr(mean reward <= p_n - delta/m).
struct SymbolwiseRewardAnalysis {
  double p_n = 0.0;
  double chernoff_tail = 0.0;  // exp(-(delta^2 / 2) m p_n), as stated
  double lower_tail = 0.0;     // exp(-delta^2 / (2 m p_n)), multiplicative Chernoff
};

SymbolwiseRewardAnalysis symbolwise_reward_analysis(double mu, int n, int m, double delta);

/// Empirical Pr(mean reward <= p_n - delta/m) under symbolwise best-of-n on the
/// binary source P(1) = mu, against the stated tail plus statistical slack.
BoundReport audit_symbolwise_chernoff(double mu, int n, int m, double delta,
                                      std::uint64_t draws, RngSeed seed, unsigned workers = 1);

/// Same event against the multiplicative Chernoff lower tail exp(-delta^2 / (2 m p_n)).
BoundReport audit_symbolwise_lower_tail(double mu, int n, int m, double delta,
                                        std::uint64_t draws, RngSeed seed,
                                        unsigned workers = 1);

}  // namespace alignlab
