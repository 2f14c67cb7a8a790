#include <cmath>
#include <random>

#include "alignlab/alphabet.hpp"
#include "alignlab/blockwise.hpp"
#include "alignlab/bounds.hpp"
#include "alignlab/error.hpp"
#include "alignlab/exact.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace alignlab;
using doctest::Approx;

namespace {

const FiniteDistribution kCoin = FiniteDistribution::from_probs({0.5, 0.5});
const RewardFunction kIndicator({0, 1});

}  // namespace

TEST_CASE("kl upper bound on the binary instance") {
  const auto rep = audit_kl_upper(kCoin, kIndicator, Temperature(1), 2);
  // independent evaluation
  const auto target = oracle::tilt({0.5, 0.5}, {0, 1}, 1.0);
  const auto soft = oracle::soft_bon({0.5, 0.5}, {0, 1}, 1.0, 2);
  CHECK(rep.lhs == Approx(oracle::kl(target, soft)).epsilon(1e-12));
  CHECK(rep.lhs == Approx(0.02964).epsilon(1e-3));
  CHECK(rep.rhs == Approx(std::log1p(0.21355 / 2)).epsilon(1e-4));
  CHECK(rep.rhs == Approx(0.10146).epsilon(1e-4));
  CHECK(rep.holds);
  CHECK(rep.margin == Approx(rep.rhs - rep.lhs));
  CHECK(rep.instance_digest.size() == 16);

  const auto flat = audit_kl_upper(kCoin, RewardFunction({0.4, 0.4}), Temperature(1), 3);
  CHECK(flat.lhs == Approx(0.0));
  CHECK(flat.rhs == 0.0);
  CHECK(flat.holds);

  const auto fig = FiniteDistribution::from_probs({0.75, 0.2, 0.05});
  const RewardFunction fr({0.016, 0.164, 0.820});
  for (int n = 1; n <= 64; ++n) CHECK(audit_kl_upper(fig, fr, Temperature(1), n).holds);
}

TEST_CASE("hyperbolic bound") {
  const auto rep = audit_sinh_upper(kCoin, kIndicator, Temperature(1), 2);
  CHECK(rep.rhs == Approx(std::pow(std::sinh(0.5), 2) / 2).epsilon(1e-14));
  CHECK(rep.rhs == Approx(0.13577).epsilon(1e-4));
  CHECK(rep.holds);
  const auto hot = audit_sinh_upper(kCoin, kIndicator, Temperature(1e6), 2);
  CHECK(hot.rhs < 1e-12);
  CHECK(hot.lhs < 1e-12);
  CHECK(audit_cv_within_sinh(kCoin, kIndicator, Temperature(0.3), 5).holds);

  const FiniteDistribution named({"lo", "hi"}, {0.5, 0.5});
  try {
    audit_sinh_upper(named, RewardFunction({0.2, 1.5}), Temperature(1), 2);
    FAIL("expected a precondition error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("'hi'") != std::string::npos);
  }
}

TEST_CASE("temperature threshold") {
  CHECK(lambda_threshold(10, 0.1) == Approx(1 / std::log(5.0)).epsilon(1e-14));
  CHECK(lambda_threshold(10, 0.1) == Approx(0.62133).epsilon(1e-5));
  CHECK(lambda_threshold(1000000, 1000.0) < 0.1);
  CHECK_THROWS_AS(lambda_threshold(0, 0.1), DomainError);
  CHECK_THROWS_AS(lambda_threshold(1, 0.0), DomainError);
  const auto rep = audit_lambda_threshold(kCoin, kIndicator, 10, 0.1);
  CHECK(rep.holds);
  CHECK(rep.lhs <= 0.1);
}

TEST_CASE("relative reward bound") {
  const auto rep = audit_relative_reward(kCoin, kIndicator, Temperature(1), 2);
  const double big_m = std::exp(1.0) / (0.5 * (1 + std::exp(1.0))) - 1;
  CHECK(big_m == Approx(0.46213).epsilon(1e-5));
  CHECK(rep.rhs == Approx(big_m / (big_m + 2)).epsilon(1e-13));
  CHECK(rep.rhs == Approx(0.18770).epsilon(1e-4));
  const auto target = oracle::tilt({0.5, 0.5}, {0, 1}, 1.0);
  const auto soft = oracle::soft_bon({0.5, 0.5}, {0, 1}, 1.0, 2);
  CHECK(rep.lhs == Approx((target[1] - soft[1]) / target[1]).epsilon(1e-12));
  CHECK(rep.lhs == Approx(0.15803).epsilon(1e-4));
  CHECK(rep.holds);

  // n = 1: both sides coincide on this instance
  const auto tight = audit_relative_reward(kCoin, kIndicator, Temperature(1), 1);
  CHECK(tight.lhs == Approx(tight.rhs).epsilon(1e-12));
  CHECK(tight.holds);

  CHECK(audit_relative_reward(kCoin, RewardFunction({0.7, 0.7}), Temperature(1), 3).lhs ==
        Approx(0.0));
  CHECK_THROWS_AS(audit_relative_reward(kCoin, RewardFunction({0, 0}), Temperature(1), 3),
                  DomainError);
}

TEST_CASE("pinsker audit") {
  const auto rep = audit_pinsker(FiniteDistribution::from_probs({0.2, 0.5, 0.3}),
                                 RewardFunction({0.9, 0.1, 0.4}), Temperature(0.4), 3);
  CHECK(rep.holds);
}

TEST_CASE("rate fits") {
  std::vector<std::pair<double, double>> grid;
  for (int n = 4; n <= 1024; n *= 2) grid.emplace_back(n, 3.5 / n);
  const auto fit = fit_rate(grid);
  CHECK(fit.slope == Approx(-1).epsilon(1e-12));
  CHECK(fit.intercept == Approx(std::log(3.5)).epsilon(1e-12));
  CHECK(fit.r_squared == Approx(1).epsilon(1e-12));
  CHECK(fit.grid.size() == grid.size());

  auto bad = grid;
  bad[2].second = 0.0;
  CHECK_THROWS_AS(fit_rate(bad), DomainError);
  CHECK_THROWS_AS(fit_rate({{1, 1}, {2, 1}, {4, 1}}), DomainError);
  CHECK_THROWS_AS(fit_rate({{1, 1}, {4, 1}, {2, 1}, {8, 1}}), DomainError);

  std::vector<std::pair<double, double>> kl_grid, tv_grid;
  const auto target = tilt(kCoin, kIndicator, Temperature(1));
  for (int n = 4; n <= 1024; n *= 2) {
    const auto q = exact_soft_bon(kCoin, kIndicator, Temperature(1), n);
    kl_grid.emplace_back(n, kl_divergence(target, q));
    tv_grid.emplace_back(n, tv_distance(target, q));
  }
  const auto kl_fit = fit_rate(kl_grid);
  const auto tv_fit = fit_rate(tv_grid);
  CHECK(kl_fit.slope == Approx(-2).epsilon(0.05));
  CHECK(kl_fit.r_squared >= 0.98);
  CHECK(tv_fit.slope == Approx(-1).epsilon(0.05));
  CHECK(tv_fit.r_squared >= 0.98);
}

TEST_CASE("blockwise bound forms") {
  const BlockModel coin2(kCoin, kIndicator, 2);
  const auto stated = audit_blockwise_kl(coin2, Temperature(1), 2);
  const auto seqs = oracle::sequences({0.5, 0.5}, {0, 1}, 2);
  const double kl = oracle::kl(oracle::tilt(seqs.probs, seqs.rewards, 1.0),
                               oracle::soft_bon(seqs.probs, seqs.rewards, 1.0, 2));
  CHECK(stated.lhs == Approx(kl).epsilon(1e-12));
  CHECK(stated.lhs == Approx(0.016623).epsilon(1e-4));
  const double mgf1 = 0.5 * (1 + std::exp(0.5)), mgf2 = 0.5 * (1 + std::exp(1.0));
  const double c = mgf2 / (mgf1 * mgf1) - 1;
  CHECK(stated.rhs == Approx(std::log1p(c * c / 2)).epsilon(1e-12));
  // the stated form is smaller than the exact KL on this instance
  CHECK_FALSE(stated.holds);

  const auto sinh_form = audit_blockwise_sinh(coin2, Temperature(1), 2);
  CHECK(sinh_form.rhs == Approx(std::pow(std::sinh(0.5), 4) / 2).epsilon(1e-12));

  const auto product = audit_blockwise_product_moment(coin2, Temperature(1), 2);
  CHECK(product.rhs == Approx(std::log1p((std::pow(1 + c, 2) - 1) / 2)).epsilon(1e-12));
  CHECK(product.holds);
  const auto cosh_form = audit_blockwise_cosh(coin2, Temperature(1), 2);
  CHECK(cosh_form.rhs == Approx(std::log1p((std::pow(std::cosh(0.25), 4) - 1) / 2)).epsilon(1e-12));
  CHECK(cosh_form.rhs >= product.rhs);
  CHECK(cosh_form.holds);

  // m = 1 reduces to the single-symbol bound
  const BlockModel coin1(kCoin, kIndicator, 1);
  const auto flat = audit_kl_upper(kCoin, kIndicator, Temperature(0.7), 3);
  CHECK(audit_blockwise_product_moment(coin1, Temperature(0.7), 3).rhs == Approx(flat.rhs));
  CHECK(audit_blockwise_kl(coin1, Temperature(0.7), 3).lhs == Approx(flat.lhs).epsilon(1e-12));

  const auto hot = audit_blockwise_cosh(coin2, Temperature(1e6), 4);
  CHECK(hot.lhs < 1e-12);
  CHECK(hot.rhs < 1e-12);
}

TEST_CASE("corrected blockwise bounds hold on random instances") {
  std::mt19937_64 gen(53);
  std::exponential_distribution<double> e(1.0);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = 2 + trial % 2;
    std::vector<double> p(k), r(k);
    double s = 0;
    for (std::size_t i = 0; i < k; ++i) {
      s += (p[i] = e(gen));
      r[i] = u(gen);
    }
    for (auto& x : p) x /= s;
    for (int m = 2; m <= 3; ++m) {
      const BlockModel block(FiniteDistribution::from_probs(p, 1e-12), RewardFunction(r), m);
      for (double lam : {0.25, 1.0, 5.0}) {
        for (int n : {1, 2, 4, 8}) {
          CHECK(audit_blockwise_product_moment(block, Temperature(lam), n).holds);
          CHECK(audit_blockwise_cosh(block, Temperature(lam), n).holds);
        }
      }
    }
  }
}

TEST_CASE("blockwise threshold and sample complexity") {
  CHECK(blockwise_lambda_threshold(10, 0.1, 1) == Approx(2 / std::log(5.0)).epsilon(1e-14));
  CHECK(blockwise_lambda_threshold(10, 0.1, 1) == Approx(1.24267).epsilon(1e-5));
  for (int m = 1; m <= 30; ++m) CHECK(blockwise_lambda_threshold(10, 0.1, m) == Approx(2 / std::log(5.0)));
  double previous = 0;
  for (int m = 1; m <= 30; ++m) {
    const double t = blockwise_lambda_threshold(100, 0.1, m);
    CHECK(t > previous);
    CHECK(t < 2 / std::log(5.0) + 1e-12);
    previous = t;
  }
  CHECK_THROWS_AS(blockwise_lambda_threshold(10, 0.1, 0), DomainError);

  CHECK(sample_complexity_match(1, 0.1, 4) == Approx(65.09).epsilon(1e-4));
  CHECK(sample_complexity_match(1, 0.1, 4) ==
        Approx(10 * std::pow((std::exp(2.0) - 1) / 4, 4)).epsilon(1e-14));
  CHECK_THROWS_AS(sample_complexity_match(1, 0.1, 0), DomainError);
  const double lam = 1.0;  // below 2 / ln 5
  for (int m = 1; m < 8; ++m) {
    CHECK(sample_complexity_match(lam, 0.1, m + 1) > sample_complexity_match(lam, 0.1, m));
  }
}

TEST_CASE("monte carlo audits") {
  const double core = 1 - std::pow(0.99, 100);
  CHECK(core == Approx(0.63397).epsilon(1e-5));
  const BlockModel block(kCoin, kIndicator, 20);
  const auto rep = audit_blockwise_bon_ceiling(block, 100, 1.0, 20000, {9, 0}, 4);
  CHECK(rep.holds);
  CHECK(rep.rhs > core);
  CHECK(rep.lhs >= 0.0);
  CHECK(rep.lhs <= 1.0);
  const auto again = audit_blockwise_bon_ceiling(block, 100, 1.0, 20000, {9, 0}, 1);
  CHECK(again.lhs == rep.lhs);

  const auto analysis = symbolwise_reward_analysis(0.3, 5, 10, 1.0);
  CHECK(analysis.p_n == Approx(0.83193).epsilon(1e-5));
  CHECK(symbolwise_reward_analysis(0.3, 1, 10, 1.0).p_n == Approx(0.3).epsilon(1e-15));
  const auto example = symbolwise_reward_analysis(0.5, 3, 50, 2.0);
  CHECK(example.p_n == 0.875);
  CHECK(example.chernoff_tail == Approx(std::exp(-2.0 * 50 * 0.875)));
  CHECK(example.lower_tail == Approx(std::exp(-4.0 / (2 * 50 * 0.875))));

  const auto lower = audit_symbolwise_lower_tail(0.5, 3, 50, 2.0, 20000, {4, 0}, 4);
  CHECK(lower.holds);
  const auto stated = audit_symbolwise_chernoff(0.5, 3, 50, 2.0, 20000, {4, 0}, 4);
  CHECK(stated.lhs == lower.lhs);
  // the empirical tail is far above exp(-87.5)
  CHECK(stated.lhs > 0.1);
  CHECK_FALSE(stated.holds);
}

TEST_CASE("digests are stable and input sensitive") {
  InstanceDigest a, b, c;
  a.add(1.0).add(2);
  b.add(1.0).add(2);
  c.add(1.0).add(3);
  CHECK(a.hex() == b.hex());
  CHECK(a.hex() != c.hex());
  InstanceDigest empty;
  CHECK(empty.hex() == "cbf29ce484222325");
  const auto r1 = audit_kl_upper(kCoin, kIndicator, Temperature(1), 2);
  const auto r2 = audit_kl_upper(kCoin, kIndicator, Temperature(1), 2);
  const auto r3 = audit_kl_upper(kCoin, kIndicator, Temperature(1), 3);
  CHECK(r1.instance_digest == r2.instance_digest);
  CHECK(r1.instance_digest != r3.instance_digest);
}
