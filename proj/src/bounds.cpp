#include "alignlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numeric>

#include "alignlab/alphabet.hpp"
#include "alignlab/blockwise.hpp"
#include "alignlab/error.hpp"
#include "alignlab/parallel.hpp"
#include "alignlab/sampler.hpp"

namespace alignlab {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct ExactPair {
  FiniteDistribution tilted;
  FiniteDistribution soft;
};

ExactPair exact_pair(const FiniteDistribution& p, const RewardFunction& r, Temperature lam,
                     int n, const EnumerationBudget& budget) {
  return {tilt(p, r, lam), exact_soft_bon(p, r, lam, n, budget)};
}

double exact_kl(const FiniteDistribution& p, const RewardFunction& r, Temperature lam, int n,
                const EnumerationBudget& budget) {
  const auto pair = exact_pair(p, r, lam, n, budget);
  return kl_divergence(pair.tilted, pair.soft);
}

double exact_blockwise_kl(const BlockModel& block, Temperature lam, int n,
                          const EnumerationBudget& budget) {
  return kl_divergence(blockwise_tilt(block, lam), exact_blockwise_soft_bon(block, lam, n, budget));
}

// Bound value + slack-aware report for a Monte Carlo frequency.
BoundReport statistical_report(std::string name, std::uint64_t hits, std::uint64_t draws,
                               double core, std::string digest) {
  const double freq = static_cast<double>(hits) / static_cast<double>(draws);
  const double q = std::clamp(core, 0.0, 1.0);
  const double se = std::sqrt(q * (1.0 - q) / static_cast<double>(draws));
  const double rhs = core + kStatisticalSlackSigmas * se;
  std::string note = "bound " + num(core) + ", " + std::to_string(draws) + " draws";
  if (freq > core && freq <= rhs + kBoundSlack) note += "; warning: exceeds bound within slack";
  return make_report(std::move(name), freq, rhs, std::move(digest), std::move(note));
}

std::uint64_t count_hits(const SamplerConfig& config, std::uint64_t draws, RngSeed seed,
                         unsigned workers,
                         const std::function<bool(const Sequence&)>& event) {
  const Sampler sampler(config);
  workers = std::max(1u, workers);
  std::vector<std::uint64_t> hits(workers, 0);
  parallel_chunks(static_cast<std::size_t>(draws), workers,
                  [&](std::size_t begin, std::size_t end, unsigned chunk) {
                    for (std::size_t i = begin; i < end; ++i) {
                      CounterRng rng({seed.seed, seed.stream + i});
                      if (event(sampler.draw_sequence(rng))) ++hits[chunk];
                    }
                  });
  return std::accumulate(hits.begin(), hits.end(), std::uint64_t{0});
}

void require_unit_block(const BlockModel& block) {
  require_unit_rewards(block.base(), block.reward());
}

std::uint64_t symbolwise_tail_hits(double mu, int n, int m, double delta, std::uint64_t draws,
                                   RngSeed seed, unsigned workers) {
  const SymbolwiseRewardAnalysis analysis = symbolwise_reward_analysis(mu, n, m, delta);
  const BlockModel block(FiniteDistribution::from_probs({1.0 - mu, mu}),
                         RewardFunction({0.0, 1.0}), m);
  // sum_i r(Y_i) <= m p_n - delta, on integer successes.
  const double cutoff = m * analysis.p_n - delta + 1e-9;
  return count_hits({SamplerKind::SymbolwiseBestOfN, block, n, 1.0}, draws, seed, workers,
                    [cutoff](const Sequence& seq) {
                      const auto successes = std::count(seq.begin(), seq.end(), std::size_t{1});
                      return static_cast<double>(successes) <= cutoff;
                    });
}

}  // namespace

std::string digest_of(const std::string& bound, const FiniteDistribution& p,
                      const RewardFunction& r, double lambda, int n) {
  InstanceDigest d;
  d.add(bound).add(p.probs()).add(r.values()).add(lambda).add(n);
  return d.hex();
}

std::string digest_of(const std::string& bound, const BlockModel& block, double lambda, int n) {
  InstanceDigest d;
  d.add(bound)
      .add(block.base().probs())
      .add(block.reward().values())
      .add(block.m())
      .add(lambda)
      .add(n);
  return d.hex();
}

BoundReport make_report(std::string name, double lhs, double rhs, std::string digest,
                        std::string note) {
  BoundReport out;
  out.bound_name = std::move(name);
  out.lhs = lhs;
  out.rhs = rhs;
  out.margin = rhs - lhs;
  out.holds = lhs <= rhs + kBoundSlack;
  out.instance_digest = std::move(digest);
  out.note = std::move(note);
  return out;
}

// ---------------------------------------------------------------------------
// InstanceDigest

void InstanceDigest::mix_byte(unsigned char byte) {
  state_ ^= byte;
  state_ *= 0x100000001b3ULL;
}

InstanceDigest& InstanceDigest::add(std::uint64_t value) {
  for (int i = 0; i < 8; ++i) mix_byte(static_cast<unsigned char>(value >> (8 * i)));
  return *this;
}

InstanceDigest& InstanceDigest::add(double value) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &value, sizeof bits);
  return add(bits);
}

InstanceDigest& InstanceDigest::add(std::span<const double> values) {
  add(static_cast<std::uint64_t>(values.size()));
  for (double v : values) add(v);
  return *this;
}

InstanceDigest& InstanceDigest::add(const std::string& text) {
  add(static_cast<std::uint64_t>(text.size()));
  for (char c : text) mix_byte(static_cast<unsigned char>(c));
  return *this;
}

std::string InstanceDigest::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 0; i < 16; ++i) out[15 - i] = kDigits[(state_ >> (4 * i)) & 0xf];
  return out;
}

// ---------------------------------------------------------------------------
// bound values

double kl_upper_bound(const FiniteDistribution& p, const RewardFunction& r, Temperature lam,
                      int n) {
  if (n < 1) throw DomainError("number of candidates n must be at least 1");
  return std::log1p(cv_squared_exp_reward(p, r, lam) / n);
}

double sinh_upper_bound(const FiniteDistribution& p, const RewardFunction& r, Temperature lam,
                        int n) {
  require_unit_rewards(p, r);
  if (n < 1) throw DomainError("number of candidates n must be at least 1");
  const double s = std::sinh(0.5 / lam.value());
  return s * s / n;
}

double relative_reward_bound(const FiniteDistribution& p, const RewardFunction& r,
                             Temperature lam, int n) {
  require_unit_rewards(p, r);
  if (n < 1) throw DomainError("number of candidates n must be at least 1");
  // M = e^{1/lambda} / E_P[e^{r/lambda}] - 1, in the log domain.
  const double log_mgf = kernel::log_mgf(p.probs(), r.values(), 1.0 / lam.value());
  const double big_m = std::expm1(1.0 / lam.value() - log_mgf);
  return big_m / (big_m + n);
}

double relative_reward_gap(const FiniteDistribution& tilted, const FiniteDistribution& q,
                           const RewardFunction& r) {
  const double tilted_reward = expected_reward(tilted, r);
  if (!(tilted_reward > 0.0)) {
    throw DomainError("relative reward bound: tilted expected reward is zero (degenerate instance)");
  }
  return (tilted_reward - expected_reward(q, r)) / tilted_reward;
}

double blockwise_kl_stated_bound(const BlockModel& block, Temperature lam, int n) {
  const int m = block.m();
  const double c = cv_squared_exp_reward(block.base(), block.reward(), Temperature(m * lam.value()));
  return std::log1p(std::pow(c, m) / n);
}

double blockwise_sinh_stated_bound(const BlockModel& block, Temperature lam, int n) {
  require_unit_block(block);
  const int m = block.m();
  return std::pow(std::sinh(1.0 / (m * lam.value())), 2.0 * m) / n;
}

double blockwise_product_moment_bound(const BlockModel& block, Temperature lam, int n) {
  const int m = block.m();
  const double c = cv_squared_exp_reward(block.base(), block.reward(), Temperature(m * lam.value()));
  return std::log1p(std::expm1(m * std::log1p(c)) / n);
}

double blockwise_cosh_bound(const BlockModel& block, Temperature lam, int n) {
  require_unit_block(block);
  const int m = block.m();
  const double half = 0.5 / (m * lam.value());
  return std::log1p(std::expm1(2.0 * m * std::log(std::cosh(half))) / n);
}

// ---------------------------------------------------------------------------
// single-symbol bounds

BoundReport audit_kl_upper(const FiniteDistribution& p, const RewardFunction& r,
                           Temperature lam, int n, const EnumerationBudget& budget) {
  const double rhs = kl_upper_bound(p, r, lam, n);
  const double lhs = exact_kl(p, r, lam, n, budget);
  return make_report("kl_upper_cv", lhs, rhs, digest_of("kl_upper_cv", p, r, lam.value(), n));
}

BoundReport audit_sinh_upper(const FiniteDistribution& p, const RewardFunction& r,
                             Temperature lam, int n, const EnumerationBudget& budget) {
  const double rhs = sinh_upper_bound(p, r, lam, n);
  const double lhs = exact_kl(p, r, lam, n, budget);
  return make_report("kl_upper_sinh", lhs, rhs, digest_of("kl_upper_sinh", p, r, lam.value(), n));
}

BoundReport audit_cv_within_sinh(const FiniteDistribution& p, const RewardFunction& r,
                                 Temperature lam, int n) {
  const double rhs = sinh_upper_bound(p, r, lam, n);
  return make_report("cv_within_sinh", kl_upper_bound(p, r, lam, n), rhs,
                     digest_of("cv_within_sinh", p, r, lam.value(), n));
}

double lambda_threshold(int n, double eps) {
  if (n < 1) throw DomainError("lambda_threshold: n must be at least 1");
  if (!(eps > 0.0)) throw DomainError("lambda_threshold: eps must be positive");
  return 1.0 / std::log1p(4.0 * n * eps);
}

BoundReport audit_lambda_threshold(const FiniteDistribution& p, const RewardFunction& r, int n,
                                   double eps, const EnumerationBudget& budget) {
  require_unit_rewards(p, r);
  const Temperature lam(lambda_threshold(n, eps));
  const double lhs = exact_kl(p, r, lam, n, budget);
  InstanceDigest d;
  d.add(std::string("lambda_threshold")).add(p.probs()).add(r.values()).add(n).add(eps);
  return make_report("lambda_threshold", lhs, eps, d.hex(),
                     "lambda = " + num(lam.value()));
}

BoundReport audit_relative_reward(const FiniteDistribution& p, const RewardFunction& r,
                                  Temperature lam, int n, const EnumerationBudget& budget) {
  const double rhs = relative_reward_bound(p, r, lam, n);
  const auto pair = exact_pair(p, r, lam, n, budget);
  const double lhs = relative_reward_gap(pair.tilted, pair.soft, r);
  return make_report("relative_reward", lhs, rhs,
                     digest_of("relative_reward", p, r, lam.value(), n));
}

BoundReport audit_pinsker(const FiniteDistribution& p, const RewardFunction& r,
                          Temperature lam, int n, const EnumerationBudget& budget) {
  const auto pair = exact_pair(p, r, lam, n, budget);
  const double tv = tv_distance(pair.tilted, pair.soft);
  return make_report("pinsker", 2.0 * tv * tv, kl_divergence(pair.tilted, pair.soft),
                     digest_of("pinsker", p, r, lam.value(), n));
}

// ---------------------------------------------------------------------------
// rates

RateFit fit_rate(std::vector<std::pair<double, double>> grid) {
  if (grid.size() < 4) throw DomainError("fit_rate needs at least four grid points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i].first > 0.0)) throw DomainError("fit_rate: n must be positive");
    if (!(grid[i].second > 0.0) || !std::isfinite(grid[i].second)) {
      throw DomainError("fit_rate: values must be finite and strictly positive");
    }
    if (i > 0 && !(grid[i].first > grid[i - 1].first)) {
      throw DomainError("fit_rate: n must be strictly increasing");
    }
  }
  const double count = static_cast<double>(grid.size());
  double sx = 0, sy = 0;
  for (const auto& [n, v] : grid) {
    sx += std::log(n);
    sy += std::log(v);
  }
  const double mx = sx / count, my = sy / count;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [n, v] : grid) {
    const double dx = std::log(n) - mx, dy = std::log(v) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  fit.grid = std::move(grid);
  return fit;
}

// ---------------------------------------------------------------------------
// blockwise bounds

BoundReport audit_blockwise_kl(const BlockModel& block, Temperature lam, int n,
                               const EnumerationBudget& budget) {
  const double rhs = blockwise_kl_stated_bound(block, lam, n);
  return make_report("blockwise_kl_stated", exact_blockwise_kl(block, lam, n, budget), rhs,
                     digest_of("blockwise_kl_stated", block, lam.value(), n));
}

BoundReport audit_blockwise_sinh(const BlockModel& block, Temperature lam, int n,
                                 const EnumerationBudget& budget) {
  const double rhs = blockwise_sinh_stated_bound(block, lam, n);
  return make_report("blockwise_sinh_stated", exact_blockwise_kl(block, lam, n, budget), rhs,
                     digest_of("blockwise_sinh_stated", block, lam.value(), n));
}

BoundReport audit_blockwise_product_moment(const BlockModel& block, Temperature lam, int n,
                                           const EnumerationBudget& budget) {
  const double rhs = blockwise_product_moment_bound(block, lam, n);
  return make_report("blockwise_kl_product_moment", exact_blockwise_kl(block, lam, n, budget),
                     rhs, digest_of("blockwise_kl_product_moment", block, lam.value(), n));
}

BoundReport audit_blockwise_cosh(const BlockModel& block, Temperature lam, int n,
                                 const EnumerationBudget& budget) {
  const double rhs = blockwise_cosh_bound(block, lam, n);
  return make_report("blockwise_kl_cosh", exact_blockwise_kl(block, lam, n, budget), rhs,
                     digest_of("blockwise_kl_cosh", block, lam.value(), n));
}

double blockwise_lambda_threshold(int n, double eps, int m) {
  if (n < 1) throw DomainError("blockwise_lambda_threshold: n must be at least 1");
  if (!(eps > 0.0)) throw DomainError("blockwise_lambda_threshold: eps must be positive");
  if (m < 1) throw DomainError("blockwise_lambda_threshold: m must be at least 1");
  return 2.0 / std::log1p(4.0 * std::pow(n * eps, 1.0 / m));
}

BoundReport audit_blockwise_lambda_threshold(const BlockModel& block, int n, double eps,
                                             const EnumerationBudget& budget) {
  require_unit_block(block);
  const Temperature lam(blockwise_lambda_threshold(n, eps, block.m()));
  const double lhs = exact_blockwise_kl(block, lam, n, budget);
  InstanceDigest d;
  d.add(std::string("blockwise_lambda_threshold"))
      .add(block.base().probs())
      .add(block.reward().values())
      .add(block.m())
      .add(n)
      .add(eps);
  return make_report("blockwise_lambda_threshold", lhs, eps, d.hex(),
                     "lambda = " + num(lam.value()));
}

double sample_complexity_match(double lambda_prime, double eps, int m) {
  if (!(lambda_prime > 0.0)) throw DomainError("sample_complexity_match: lambda' must be positive");
  if (!(eps > 0.0)) throw DomainError("sample_complexity_match: eps must be positive");
  if (m < 1) throw DomainError("sample_complexity_match: m must be at least 1");
  return std::pow(std::expm1(2.0 / lambda_prime) / 4.0, m) / eps;
}

BoundReport audit_blockwise_bon_ceiling(const BlockModel& block, int n, double alpha,
                                        std::uint64_t draws, RngSeed seed, unsigned workers) {
  require_unit_block(block);
  if (!(alpha > 0.0)) throw DomainError("blockwise best-of-n ceiling: alpha must be positive");
  if (n < 1) throw DomainError("number of candidates n must be at least 1");
  if (draws < 1) throw DomainError("Monte Carlo audit needs at least one draw");
  const double mu = expected_reward(block.base(), block.reward());
  const double threshold = mu + std::sqrt(alpha * std::log(static_cast<double>(n)) / (2.0 * block.m()));
  const std::uint64_t hits =
      count_hits({SamplerKind::BlockwiseBestOfN, block, n, 1.0}, draws, seed, workers,
                 [&](const Sequence& seq) { return block.reward_of(seq) >= threshold; });
  // 1 - (1 - n^{-alpha})^n
  const double core = -std::expm1(n * std::log1p(-std::pow(static_cast<double>(n), -alpha)));
  InstanceDigest d;
  d.add(std::string("blockwise_bon_ceiling"))
      .add(block.base().probs())
      .add(block.reward().values())
      .add(block.m())
      .add(n)
      .add(alpha)
      .add(draws)
      .add(seed.seed)
      .add(seed.stream);
  return statistical_report("blockwise_bon_ceiling", hits, draws, core, d.hex());
}

SymbolwiseRewardAnalysis symbolwise_reward_analysis(double mu, int n, int m, double delta) {
  if (!(mu > 0.0 && mu < 1.0)) throw DomainError("symbolwise analysis: mu must lie in (0, 1)");
  if (n < 1 || m < 1) throw DomainError("symbolwise analysis: n and m must be at least 1");
  if (!(delta > 0.0)) throw DomainError("symbolwise analysis: delta must be positive");
  SymbolwiseRewardAnalysis out;
  out.p_n = -std::expm1(n * std::log1p(-mu));
  out.chernoff_tail = std::exp(-(delta * delta / 2.0) * m * out.p_n);
  out.lower_tail = std::exp(-delta * delta / (2.0 * m * out.p_n));
  return out;
}

namespace {
std::string symbolwise_digest(const char* name, double mu, int n, int m, double delta,
                              std::uint64_t draws, RngSeed seed) {
  InstanceDigest d;
  d.add(std::string(name)).add(mu).add(n).add(m).add(delta).add(draws).add(seed.seed).add(seed.stream);
  return d.hex();
}
}  // namespace

BoundReport audit_symbolwise_chernoff(double mu, int n, int m, double delta,
                                      std::uint64_t draws, RngSeed seed, unsigned workers) {
  if (draws < 1) throw DomainError("Monte Carlo audit needs at least one draw");
  const auto analysis = symbolwise_reward_analysis(mu, n, m, delta);
  const auto hits = symbolwise_tail_hits(mu, n, m, delta, draws, seed, workers);
  return statistical_report("symbolwise_chernoff_stated", hits, draws, analysis.chernoff_tail,
                            symbolwise_digest("symbolwise_chernoff_stated", mu, n, m, delta,
                                              draws, seed));
}

BoundReport audit_symbolwise_lower_tail(double mu, int n, int m, double delta,
                                        std::uint64_t draws, RngSeed seed, unsigned workers) {
  if (draws < 1) throw DomainError("Monte Carlo audit needs at least one draw");
  const auto analysis = symbolwise_reward_analysis(mu, n, m, delta);
  const auto hits = symbolwise_tail_hits(mu, n, m, delta, draws, seed, workers);
  return statistical_report("symbolwise_lower_tail", hits, draws, analysis.lower_tail,
                            symbolwise_digest("symbolwise_lower_tail", mu, n, m, delta, draws,
                                              seed));
}

}  // namespace alignlab
