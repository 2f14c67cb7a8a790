#include "alignlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>

#include "alignlab/alphabet.hpp"
#include "alignlab/blockwise.hpp"
#include "alignlab/error.hpp"
#include "alignlab/exact.hpp"
#include "alignlab/parallel.hpp"
#include "alignlab/sampler.hpp"

namespace alignlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Draw streams of different grid points never overlap: point k owns
// streams [base + k * 2^40, base + (k + 1) * 2^40).
constexpr int kStreamShift = 40;

// Random-suite blockwise audits are skipped when count vectors times reward
// levels exceeds this.
constexpr std::uint64_t kSuiteBlockwiseWork = 2'000'000;

RngSeed point_seed(const ExperimentConfig& config, std::size_t point) {
  return {config.seed.seed, config.seed.stream + (static_cast<std::uint64_t>(point) << kStreamShift)};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string label_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::vector<int> or_default(const std::vector<int>& v, std::vector<int> fallback) {
  return v.empty() ? fallback : v;
}

std::vector<double> or_default(const std::vector<double>& v, std::vector<double> fallback) {
  return v.empty() ? fallback : v;
}

[[noreturn]] void rethrow_budget(const BudgetError& e, const std::string& where) {
  throw BudgetError(where + ": " + e.what(), e.required(), e.limit());
}

FiniteDistribution empirical_on(const FiniteDistribution& like, const EmpiricalDistribution& emp) {
  return FiniteDistribution::on_alphabet_of(like, emp.frequencies(), 1e-9);
}

bool unit_rewards(const RewardFunction& r) { return r.in_unit_interval(); }

std::string strategy_label(const std::string& strategy, int m) {
  return strategy == "blockwise" ? "blockwise_m" + std::to_string(m) : strategy;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return {};
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) value = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string Table::to_csv() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_field(fields[i]);
    }
    out += '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
  return out;
}

// ---------------------------------------------------------------------------
// pareto

std::vector<double> frontier_lambda_grid() {
  std::vector<double> out;
  const double lo = std::log(0.01), hi = std::log(100.0);
  constexpr int kPoints = 81;
  for (int i = kPoints - 1; i >= 0; --i) out.push_back(std::exp(lo + (hi - lo) * i / (kPoints - 1)));
  return out;
}

FrontierMatch nearest_frontier_point(const FiniteDistribution& p, const RewardFunction& r,
                                     const FiniteDistribution& q) {
  auto objective = [&](double t) {
    return kl_divergence(tilt(p, r, Temperature(std::exp(t))), q);
  };
  const double lo = std::log(1e-3), hi = std::log(1e3);
  constexpr int kScan = 241;
  std::vector<double> ts(kScan), values(kScan);
  for (int i = 0; i < kScan; ++i) {
    ts[i] = lo + (hi - lo) * i / (kScan - 1);
    values[i] = objective(ts[i]);
  }
  const auto best = static_cast<int>(std::min_element(values.begin(), values.end()) - values.begin());
  double a = ts[std::max(0, best - 1)], b = ts[std::min(kScan - 1, best + 1)];
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = objective(c), fd = objective(d);
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = objective(d);
    }
  }
  double t = 0.5 * (a + b);
  double kl = objective(t);
  if (values[best] < kl) {
    t = ts[best];
    kl = values[best];
  }
  FrontierMatch out;
  const double at_infinity = kl_divergence(p, q);
  if (at_infinity <= kl) {
    out.lambda = kInf;
    out.kl = at_infinity;
    out.tv = tv_distance(p, q);
    return out;
  }
  out.lambda = std::exp(t);
  out.kl = kl;
  out.tv = tv_distance(tilt(p, r, Temperature(out.lambda)), q);
  return out;
}

namespace {

SweepRow frontier_row(const FiniteDistribution& p, const RewardFunction& r, double lambda) {
  SweepRow row;
  row.strategy = "frontier";
  row.n = 0;
  row.lambda = lambda;
  const FiniteDistribution tilted = std::isinf(lambda) ? p : tilt(p, r, Temperature(lambda));
  row.kl_to_base = kl_divergence(tilted, p);
  row.expected_reward = expected_reward(tilted, r);
  row.bound_thm1 = row.bound_sinh = row.bound_thm3_lhs = row.bound_thm3_rhs = kNaN;
  row.mode = "exact";
  return row;
}

SweepRow bon_row(const FiniteDistribution& p, const RewardFunction& r, int n) {
  const FiniteDistribution q = exact_bon(p, r, n);
  const FrontierMatch match = nearest_frontier_point(p, r, q);
  SweepRow row;
  row.strategy = "bon";
  row.n = n;
  row.lambda = match.lambda;
  row.kl_to_base = kl_divergence(q, p);
  row.kl_to_tilted = match.kl;
  row.tv_to_tilted = match.tv;
  row.expected_reward = expected_reward(q, r);
  row.bound_thm1 = row.bound_sinh = row.bound_thm3_lhs = row.bound_thm3_rhs = kNaN;
  row.mode = "exact";
  return row;
}

SweepRow soft_row(const ExperimentConfig& config, const FiniteDistribution& p,
                  const RewardFunction& r, int n, double lambda, std::size_t point) {
  const Temperature lam(lambda);
  const FiniteDistribution tilted = tilt(p, r, lam);
  SweepRow row;
  row.strategy = "soft_bon";
  row.n = n;
  row.lambda = lambda;
  std::optional<FiniteDistribution> q;
  try {
    q = exact_soft_bon(p, r, lam, n);
    row.mode = "exact";
  } catch (const BudgetError& e) {
    if (!config.mc_draws) {
      rethrow_budget(e, "soft_bon n=" + std::to_string(n) + " lambda=" + label_number(lambda));
    }
    const SamplerConfig sc{SamplerKind::SoftBestOfN, BlockModel(p, r, 1), n, lambda};
    q = empirical_on(p, estimate_distribution(sc, *config.mc_draws, point_seed(config, point)));
    row.mode = "mc";
  }
  row.kl_to_base = kl_divergence(*q, p);
  row.kl_to_tilted = kl_divergence(tilted, *q);
  row.tv_to_tilted = tv_distance(tilted, *q);
  row.expected_reward = expected_reward(*q, r);
  row.bound_thm1 = kl_upper_bound(p, r, lam, n);
  row.bound_sinh = row.bound_thm3_lhs = row.bound_thm3_rhs = kNaN;
  if (unit_rewards(r)) {
    row.bound_sinh = sinh_upper_bound(p, r, lam, n);
    if (expected_reward(tilted, r) > 0.0) {
      row.bound_thm3_lhs = relative_reward_gap(tilted, *q, r);
      row.bound_thm3_rhs = relative_reward_bound(p, r, lam, n);
    }
  }
  return row;
}

SweepRow blockwise_row(const ExperimentConfig& config, const BlockModel& block, int n,
                       double lambda, std::size_t point) {
  const Temperature lam(lambda);
  const std::string where = "blockwise m=" + std::to_string(block.m()) + " n=" +
                            std::to_string(n) + " lambda=" + label_number(lambda);
  try {
    block.require_materializable();
  } catch (const BudgetError& e) {
    rethrow_budget(e, where);
  }
  const SequenceDistribution base = product_source(block);
  const SequenceDistribution tilted = blockwise_tilt(block, lam);
  SweepRow row;
  row.strategy = strategy_label("blockwise", block.m());
  row.n = n;
  row.lambda = lambda;
  std::optional<SequenceDistribution> q;
  try {
    q = exact_blockwise_soft_bon(block, lam, n);
    row.mode = "exact";
  } catch (const BudgetError& e) {
    if (!config.mc_draws) rethrow_budget(e, where);
    const SamplerConfig sc{SamplerKind::BlockwiseSoftBestOfN, block, n, lambda};
    const auto emp = estimate_distribution(sc, *config.mc_draws, point_seed(config, point));
    q = SequenceDistribution(block.alphabet_size(), block.m(), emp.frequencies(), 1e-9);
    row.mode = "mc";
  }
  row.kl_to_base = kl_divergence(*q, base);
  row.kl_to_tilted = kl_divergence(tilted, *q);
  row.tv_to_tilted = tv_distance(tilted, *q);
  row.expected_reward = expected_sequence_reward(*q, block);
  row.bound_thm1 = blockwise_product_moment_bound(block, lam, n);
  row.bound_sinh = row.bound_thm3_lhs = row.bound_thm3_rhs = kNaN;
  if (unit_rewards(block.reward())) {
    row.bound_sinh = blockwise_cosh_bound(block, lam, n);
    const double tilted_reward = expected_sequence_reward(tilted, block);
    if (tilted_reward > 0.0) {
      const FiniteDistribution flat_base = FiniteDistribution::from_probs(
          std::vector<double>(base.probs().begin(), base.probs().end()), 1e-10);
      row.bound_thm3_lhs = (tilted_reward - row.expected_reward) / tilted_reward;
      row.bound_thm3_rhs =
          relative_reward_bound(flat_base, RewardFunction(sequence_rewards(block)), lam, n);
    }
  }
  return row;
}

}  // namespace

std::vector<SweepRow> pareto_sweep(const ExperimentConfig& config) {
  const FiniteDistribution p = config.distribution();
  const RewardFunction r = config.reward();
  const auto n_grid = or_default(config.n_grid, default_n_grid());
  const auto lambda_grid = or_default(config.lambda_grid, default_lambda_grid());
  std::vector<std::string> strategies = config.strategies;
  if (strategies.empty()) {
    strategies = {"bon", "soft_bon"};
    if (!config.m.empty()) strategies.push_back("blockwise");
  }
  for (const auto& s : strategies) {
    if (s != "bon" && s != "soft_bon" && s != "blockwise") {
      throw ConfigError("pareto does not support strategy '" + s + "'");
    }
  }
  const bool want_blockwise =
      std::find(strategies.begin(), strategies.end(), "blockwise") != strategies.end();
  if (want_blockwise && config.m.empty()) throw ConfigError("strategy blockwise needs m");

  std::vector<SweepRow> rows;
  rows.push_back(frontier_row(p, r, kInf));
  for (double lam : frontier_lambda_grid()) rows.push_back(frontier_row(p, r, lam));

  std::vector<std::function<SweepRow(std::size_t)>> tasks;
  for (const auto& s : strategies) {
    if (s == "bon") {
      for (int n : n_grid) tasks.push_back([&, n](std::size_t) { return bon_row(p, r, n); });
    } else if (s == "soft_bon") {
      for (int n : n_grid) {
        for (double lam : lambda_grid) {
          tasks.push_back([&, n, lam](std::size_t k) { return soft_row(config, p, r, n, lam, k); });
        }
      }
    } else {
      for (int m : config.m) {
        for (int n : n_grid) {
          for (double lam : lambda_grid) {
            tasks.push_back([&, m, n, lam](std::size_t k) {
              return blockwise_row(config, BlockModel(p, r, m), n, lam, k);
            });
          }
        }
      }
    }
  }
  std::vector<SweepRow> results(tasks.size());
  parallel_queue(tasks.size(), config.worker_count(),
                 [&](std::size_t k) { results[k] = tasks[k](k); });
  rows.insert(rows.end(), results.begin(), results.end());
  return rows;
}

CommandOutput cmd_pareto(const ExperimentConfig& config) {
  const auto rows = pareto_sweep(config);
  CommandOutput out;
  out.table.header = {"strategy",       "n",           "lambda",         "kl_to_base",
                      "kl_to_tilted",   "tv_to_tilted", "expected_reward", "bound_thm1",
                      "bound_sinh",     "bound_thm3_lhs", "bound_thm3_rhs", "mode"};
  for (const auto& row : rows) {
    out.table.rows.push_back({row.strategy, row.n > 0 ? std::to_string(row.n) : std::string(),
                              format_number(row.lambda), format_number(row.kl_to_base),
                              format_number(row.kl_to_tilted), format_number(row.tv_to_tilted),
                              format_number(row.expected_reward), format_number(row.bound_thm1),
                              format_number(row.bound_sinh), format_number(row.bound_thm3_lhs),
                              format_number(row.bound_thm3_rhs), row.mode});
  }
  if (config.plot_data) {
    Table plot;
    plot.header = {"series", "x", "y"};
    for (const auto& row : rows) {
      std::string series = row.strategy;
      if (row.strategy != "frontier" && row.strategy != "bon") {
        series += "_n" + std::to_string(row.n);
      }
      plot.rows.push_back(
          {series, format_number(row.kl_to_base), format_number(row.expected_reward)});
    }
    out.plot = std::move(plot);
  }
  return out;
}

// ---------------------------------------------------------------------------
// convergence

std::vector<ConvergenceStudy> convergence_study(const ExperimentConfig& config) {
  const FiniteDistribution p = config.distribution();
  const RewardFunction r = config.reward();
  const auto& n_grid = config.n_grid;
  if (n_grid.size() < 4) throw ConfigError("convergence needs an n_grid with at least 4 points");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) throw ConfigError("n_grid must be strictly increasing");
    const double ratio = static_cast<double>(n_grid[i]) / n_grid[i - 1];
    const double first = static_cast<double>(n_grid[1]) / n_grid[0];
    if (std::abs(ratio - first) > 1e-9 * first) throw ConfigError("n_grid must be geometric");
  }
  const auto lambda_grid = or_default(config.lambda_grid, {1.0});
  const bool unit = unit_rewards(r);

  std::vector<ConvergencePoint> points(lambda_grid.size() * n_grid.size());
  parallel_queue(points.size(), config.worker_count(), [&](std::size_t k) {
    const double lambda = lambda_grid[k / n_grid.size()];
    const int n = n_grid[k % n_grid.size()];
    const Temperature lam(lambda);
    ConvergencePoint& pt = points[k];
    pt.lambda = lambda;
    pt.n = n;
    const FiniteDistribution tilted = tilt(p, r, lam);
    try {
      const FiniteDistribution q = exact_soft_bon(p, r, lam, n);
      pt.kl = kl_divergence(tilted, q);
      pt.tv = tv_distance(tilted, q);
    } catch (const BudgetError& e) {
      rethrow_budget(e, "n=" + std::to_string(n) + " lambda=" + label_number(lambda));
    }
    pt.bound_thm1 = kl_upper_bound(p, r, lam, n);
    pt.bound_sinh = unit ? sinh_upper_bound(p, r, lam, n) : kNaN;
  });

  std::vector<ConvergenceStudy> out;
  for (std::size_t li = 0; li < lambda_grid.size(); ++li) {
    ConvergenceStudy study;
    study.lambda = lambda_grid[li];
    std::vector<std::pair<double, double>> kl_grid, tv_grid;
    for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
      const auto& pt = points[li * n_grid.size() + ni];
      study.points.push_back(pt);
      if (pt.kl > 0.0) kl_grid.emplace_back(pt.n, pt.kl);
      if (pt.tv > 0.0) tv_grid.emplace_back(pt.n, pt.tv);
    }
    auto fit = [](std::vector<std::pair<double, double>> grid) {
      if (grid.size() >= 4) return fit_rate(std::move(grid));
      RateFit none;
      none.slope = none.intercept = none.r_squared = kNaN;
      return none;
    };
    study.kl_fit = fit(std::move(kl_grid));
    study.tv_fit = fit(std::move(tv_grid));
    out.push_back(std::move(study));
  }
  return out;
}

CommandOutput cmd_convergence(const ExperimentConfig& config) {
  const auto studies = convergence_study(config);
  CommandOutput out;
  out.table.header = {"kind",       "lambda",     "n",     "value_kl",  "value_tv",
                      "bound_thm1", "bound_sinh", "slope", "intercept", "r_squared"};
  for (const auto& study : studies) {
    for (const auto& pt : study.points) {
      out.table.rows.push_back({"point", format_number(pt.lambda), std::to_string(pt.n),
                                format_number(pt.kl), format_number(pt.tv),
                                format_number(pt.bound_thm1), format_number(pt.bound_sinh), "",
                                "", ""});
    }
    for (const auto& [kind, fit] :
         {std::pair{"fit_kl", &study.kl_fit}, std::pair{"fit_tv", &study.tv_fit}}) {
      out.table.rows.push_back({kind, format_number(study.lambda), "", "", "", "", "",
                                format_number(fit->slope), format_number(fit->intercept),
                                format_number(fit->r_squared)});
    }
  }
  if (config.plot_data) {
    Table plot;
    plot.header = {"series", "x", "y"};
    for (const auto& study : studies) {
      const std::string tag = "_lambda" + label_number(study.lambda);
      for (const auto& pt : study.points) {
        plot.rows.push_back({"kl" + tag, std::to_string(pt.n), format_number(pt.kl)});
        plot.rows.push_back({"tv" + tag, std::to_string(pt.n), format_number(pt.tv)});
        plot.rows.push_back({"bound_thm1" + tag, std::to_string(pt.n), format_number(pt.bound_thm1)});
      }
    }
    out.plot = std::move(plot);
  }
  return out;
}

// ---------------------------------------------------------------------------
// audit

std::vector<double> audit_lambda_grid() { return {0.25, 0.5, 1.0, 2.0, 5.0}; }
std::vector<int> audit_n_grid() { return {1, 2, 4, 8, 16, 32}; }
std::vector<double> audit_eps_grid() { return {0.01, 0.05, 0.1, 0.5}; }

RandomInstance random_instance(std::uint64_t seed, int index, int min_k, int max_k) {
  if (min_k < 1 || max_k < min_k) throw DomainError("random_instance: bad alphabet size range");
  CounterRng rng({splitmix64(seed ^ 0x5ca1ab1e0ddba11ULL), static_cast<std::uint64_t>(index)});
  const int k = min_k + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_k - min_k + 1)));
  RandomInstance out;
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    out.probs.push_back(-std::log(rng.open_uniform()));
    total += out.probs.back();
  }
  for (double& q : out.probs) q /= total;
  for (int i = 0; i < k; ++i) out.rewards.push_back(rng.uniform());
  return out;
}

namespace {

class AuditCollector {
 public:
  explicit AuditCollector(std::string instance) : instance_(std::move(instance)) {}

  template <typename Fn>
  void check(const std::string& bound, const std::string& tag, const std::string& digest, Fn fn) {
    AuditRow row;
    row.instance = instance_ + tag;
    try {
      const auto [lhs, rhs] = fn();
      row.report = make_report(bound, lhs, rhs, digest);
    } catch (const BudgetError&) {
      throw;
    } catch (const PreconditionError& e) {
      error_row(row, bound, digest, std::string("precondition: ") + e.what());
    } catch (const DomainError& e) {
      error_row(row, bound, digest, std::string("domain: ") + e.what());
    }
    rows_.push_back(std::move(row));
  }

  void add(BoundReport report, const std::string& tag) {
    AuditRow row;
    row.instance = instance_ + tag;
    row.report = std::move(report);
    rows_.push_back(std::move(row));
  }

  std::vector<AuditRow>& rows() { return rows_; }

 private:
  static void error_row(AuditRow& row, const std::string& bound, const std::string& digest,
                        std::string note) {
    row.error = true;
    row.report.bound_name = bound;
    row.report.lhs = row.report.rhs = row.report.margin = kNaN;
    row.report.holds = false;
    row.report.instance_digest = digest;
    row.report.note = std::move(note);
  }

  std::string instance_;
  std::vector<AuditRow> rows_;
};

std::string point_tag(double lambda, int n) {
  return " lambda=" + label_number(lambda) + " n=" + std::to_string(n);
}

void audit_symbol_instance(AuditCollector& audit, const FiniteDistribution& p,
                           const RewardFunction& r, const std::vector<double>& lambdas,
                           const std::vector<int>& ns, const std::vector<double>& eps_grid) {
  for (double lambda : lambdas) {
    const Temperature lam(lambda);
    const FiniteDistribution tilted = tilt(p, r, lam);
    for (int n : ns) {
      const std::string tag = point_tag(lambda, n);
      std::optional<FiniteDistribution> soft;
      try {
        soft = exact_soft_bon(p, r, lam, n);
      } catch (const BudgetError& e) {
        rethrow_budget(e, "audit" + tag);
      }
      const double kl = kl_divergence(tilted, *soft);
      const double tv = tv_distance(tilted, *soft);
      auto digest = [&](const char* name) { return digest_of(name, p, r, lambda, n); };
      audit.check("kl_upper_cv", tag, digest("kl_upper_cv"),
                  [&] { return std::pair{kl, kl_upper_bound(p, r, lam, n)}; });
      audit.check("kl_upper_sinh", tag, digest("kl_upper_sinh"),
                  [&] { return std::pair{kl, sinh_upper_bound(p, r, lam, n)}; });
      audit.check("cv_within_sinh", tag, digest("cv_within_sinh"), [&] {
        const double sinh_form = sinh_upper_bound(p, r, lam, n);
        return std::pair{kl_upper_bound(p, r, lam, n), sinh_form};
      });
      audit.check("relative_reward", tag, digest("relative_reward"), [&] {
        const double rhs = relative_reward_bound(p, r, lam, n);
        return std::pair{relative_reward_gap(tilted, *soft, r), rhs};
      });
      audit.check("pinsker", tag, digest("pinsker"), [&] { return std::pair{2.0 * tv * tv, kl}; });
    }
  }
  for (double eps : eps_grid) {
    for (int n : ns) {
      const std::string tag = " eps=" + label_number(eps) + " n=" + std::to_string(n);
      InstanceDigest d;
      d.add(std::string("lambda_threshold")).add(p.probs()).add(r.values()).add(n).add(eps);
      audit.check("lambda_threshold", tag, d.hex(), [&] {
        require_unit_rewards(p, r);
        const Temperature lam(lambda_threshold(n, eps));
        try {
          return std::pair{kl_divergence(tilt(p, r, lam), exact_soft_bon(p, r, lam, n)), eps};
        } catch (const BudgetError& e) {
          rethrow_budget(e, "audit" + tag);
        }
      });
    }
  }
}

// Work of one exact blockwise evaluation: count vectors times reward levels.
std::uint64_t blockwise_work(const BlockModel& block, int n) {
  if (block.sequence_count() > kMaxSequences) return std::numeric_limits<std::uint64_t>::max();
  auto rewards = sequence_rewards(block);
  std::sort(rewards.begin(), rewards.end());
  const auto levels = static_cast<std::uint64_t>(
      std::unique(rewards.begin(), rewards.end()) - rewards.begin());
  const std::uint64_t count = composition_count(static_cast<std::uint64_t>(n - 1), levels);
  if (count > std::numeric_limits<std::uint64_t>::max() / levels) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return count * levels;
}

// Returns the number of skipped grid points when `work_cap` is set.
int audit_block_instance(AuditCollector& audit, const BlockModel& block,
                         const std::vector<double>& lambdas, const std::vector<int>& ns,
                         const std::vector<double>& eps_grid, std::uint64_t work_cap) {
  const std::string mtag = " m=" + std::to_string(block.m());
  int skipped = 0;
  auto feasible = [&](int n) {
    if (work_cap == 0) return true;
    if (blockwise_work(block, n) <= work_cap) return true;
    ++skipped;
    return false;
  };
  auto exact_kl = [&](Temperature lam, int n, const std::string& tag) {
    try {
      return kl_divergence(blockwise_tilt(block, lam), exact_blockwise_soft_bon(block, lam, n));
    } catch (const BudgetError& e) {
      rethrow_budget(e, "audit" + tag);
    }
  };
  for (double lambda : lambdas) {
    const Temperature lam(lambda);
    for (int n : ns) {
      if (!feasible(n)) continue;
      const std::string tag = mtag + point_tag(lambda, n);
      const double kl = exact_kl(lam, n, tag);
      auto digest = [&](const char* name) { return digest_of(name, block, lambda, n); };
      audit.check("blockwise_kl_stated", tag, digest("blockwise_kl_stated"),
                  [&] { return std::pair{kl, blockwise_kl_stated_bound(block, lam, n)}; });
      audit.check("blockwise_sinh_stated", tag, digest("blockwise_sinh_stated"),
                  [&] { return std::pair{kl, blockwise_sinh_stated_bound(block, lam, n)}; });
      audit.check("blockwise_kl_product_moment", tag, digest("blockwise_kl_product_moment"),
                  [&] { return std::pair{kl, blockwise_product_moment_bound(block, lam, n)}; });
      audit.check("blockwise_kl_cosh", tag, digest("blockwise_kl_cosh"),
                  [&] { return std::pair{kl, blockwise_cosh_bound(block, lam, n)}; });
    }
  }
  for (double eps : eps_grid) {
    for (int n : ns) {
      if (!feasible(n)) continue;
      const std::string tag = mtag + " eps=" + label_number(eps) + " n=" + std::to_string(n);
      InstanceDigest d;
      d.add(std::string("blockwise_lambda_threshold"))
          .add(block.base().probs())
          .add(block.reward().values())
          .add(block.m())
          .add(n)
          .add(eps);
      audit.check("blockwise_lambda_threshold", tag, d.hex(), [&] {
        require_unit_rewards(block.base(), block.reward());
        const Temperature lam(blockwise_lambda_threshold(n, eps, block.m()));
        return std::pair{exact_kl(lam, n, tag), eps};
      });
    }
  }
  return skipped;
}

std::string instance_label(const std::string& suite, int index, std::size_t k) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s/%03d K=%zu", suite.c_str(), index, k);
  return buf;
}

}  // namespace

std::vector<AuditRow> audit_suite(const ExperimentConfig& config) {
  std::vector<std::string> suites = config.suites;
  if (suites.empty()) {
    suites = config.has_instance() ? std::vector<std::string>{"instance"}
                                   : std::vector<std::string>{"random", "blockwise", "monte_carlo"};
  }
  const auto has = [&](const char* s) {
    return std::find(suites.begin(), suites.end(), s) != suites.end();
  };
  const unsigned workers = config.worker_count();
  const auto eps_grid = config.eps.empty() ? audit_eps_grid() : config.eps;
  const auto suite_eps = audit_eps_grid();
  std::vector<AuditRow> rows;
  auto append = [&rows](std::vector<std::vector<AuditRow>>& parts) {
    for (auto& part : parts) {
      for (auto& row : part) rows.push_back(std::move(row));
    }
  };

  if (has("instance")) {
    const FiniteDistribution p = config.distribution();
    const RewardFunction r = config.reward();
    AuditCollector audit("instance");
    audit_symbol_instance(audit, p, r, or_default(config.lambda_grid, audit_lambda_grid()),
                          or_default(config.n_grid, audit_n_grid()), eps_grid);
    for (int m : config.m) {
      audit_block_instance(audit, BlockModel(p, r, m),
                           or_default(config.lambda_grid, audit_lambda_grid()),
                           or_default(config.n_grid, audit_n_grid()), eps_grid, 0);
    }
    rows.insert(rows.end(), audit.rows().begin(), audit.rows().end());
  }

  if (has("random")) {
    std::vector<std::vector<AuditRow>> parts(static_cast<std::size_t>(config.audit_instances));
    parallel_queue(parts.size(), workers, [&](std::size_t i) {
      const auto inst = random_instance(config.seed.seed, static_cast<int>(i));
      AuditCollector audit(instance_label("random", static_cast<int>(i), inst.probs.size()));
      audit_symbol_instance(audit, FiniteDistribution::from_probs(inst.probs, 1e-9),
                            RewardFunction(inst.rewards), audit_lambda_grid(), audit_n_grid(),
                            suite_eps);
      parts[i] = std::move(audit.rows());
    });
    append(parts);
  }

  if (has("blockwise")) {
    // Every random instance at block lengths 2..4, dropping grid points whose
    // exact evaluation exceeds the suite work cap (K = 2 is always complete).
    const std::vector<int> block_lengths = {2, 3, 4};
    const std::size_t count = static_cast<std::size_t>(config.audit_instances) * block_lengths.size();
    std::vector<std::vector<AuditRow>> parts(count + 1);
    parallel_queue(count, workers, [&](std::size_t k) {
      const int i = static_cast<int>(k / block_lengths.size());
      const int m = block_lengths[k % block_lengths.size()];
      const auto inst = random_instance(config.seed.seed, i);
      AuditCollector audit(instance_label("blockwise", i, inst.probs.size()));
      const BlockModel block(FiniteDistribution::from_probs(inst.probs, 1e-9),
                             RewardFunction(inst.rewards), m);
      audit_block_instance(audit, block, audit_lambda_grid(), audit_n_grid(), suite_eps,
                           kSuiteBlockwiseWork);
      parts[k] = std::move(audit.rows());
    });
    AuditCollector fixed("blockwise/binary p=0.5");
    audit_block_instance(fixed, BlockModel(FiniteDistribution::from_probs({0.5, 0.5}),
                                           RewardFunction({0.0, 1.0}), 2),
                         {1.0}, {2}, {}, 0);
    parts[count] = std::move(fixed.rows());
    append(parts);
  }

  if (has("monte_carlo")) {
    const std::uint64_t draws = config.mc_draws.value_or(100'000);
    std::size_t stream = 0;
    auto next_seed = [&] { return point_seed(config, stream++); };
    AuditCollector mc("monte_carlo");
    const auto binary = FiniteDistribution::from_probs({0.5, 0.5});
    const RewardFunction indicator({0.0, 1.0});
    struct CeilingCase {
      FiniteDistribution p;
      RewardFunction r;
      int m;
      int n;
      double alpha;
    };
    const auto k3 = random_instance(config.seed.seed, 0, 3, 3);
    const std::vector<CeilingCase> ceiling_cases = {
        {binary, indicator, 20, 100, 1.0},
        {binary, indicator, 8, 16, 0.5},
        {binary, indicator, 20, 100, 2.0},
        {FiniteDistribution::from_probs(k3.probs, 1e-9), RewardFunction(k3.rewards), 10, 20, 1.0},
    };
    for (const auto& c : ceiling_cases) {
      const BlockModel block(c.p, c.r, c.m);
      mc.add(audit_blockwise_bon_ceiling(block, c.n, c.alpha, draws, next_seed(), workers),
             " bon_ceiling K=" + std::to_string(c.p.size()) + " m=" + std::to_string(c.m) +
                 " n=" + std::to_string(c.n) + " alpha=" + label_number(c.alpha));
    }
    struct TailCase {
      double mu;
      int n;
      int m;
      double delta;
    };
    for (const TailCase& c : {TailCase{0.5, 3, 50, 2.0}, TailCase{0.3, 5, 50, 3.0}}) {
      const std::string tag = " symbolwise mu=" + label_number(c.mu) + " n=" + std::to_string(c.n) +
                              " m=" + std::to_string(c.m) + " delta=" + label_number(c.delta);
      const RngSeed seed = next_seed();
      mc.add(audit_symbolwise_chernoff(c.mu, c.n, c.m, c.delta, draws, seed, workers), tag);
      mc.add(audit_symbolwise_lower_tail(c.mu, c.n, c.m, c.delta, draws, seed, workers), tag);
    }
    rows.insert(rows.end(), mc.rows().begin(), mc.rows().end());
  }
  return rows;
}

CommandOutput cmd_audit(const ExperimentConfig& config) {
  const auto rows = audit_suite(config);
  CommandOutput out;
  out.table.header = {"bound_name", "instance", "lhs", "rhs", "margin", "holds", "digest", "note"};
  for (const auto& row : rows) {
    const BoundReport& rep = row.report;
    out.table.rows.push_back({rep.bound_name, row.instance, format_number(rep.lhs),
                              format_number(rep.rhs), format_number(rep.margin),
                              rep.holds ? "true" : "false", rep.instance_digest, rep.note});
    if (!rep.holds) {
      std::string msg = rep.bound_name + " [" + row.instance + "]: ";
      if (row.error) {
        msg += rep.note;
      } else {
        msg += "lhs " + format_number(rep.lhs) + " > rhs " + format_number(rep.rhs);
      }
      out.failures.push_back(std::move(msg));
    }
  }
  out.exit_code = out.failures.empty() ? 0 : 4;
  return out;
}

// ---------------------------------------------------------------------------
// blockwise

std::vector<BlockwiseRow> blockwise_sweep(const ExperimentConfig& config) {
  const FiniteDistribution p = config.distribution();
  const RewardFunction r = config.reward();
  const auto ms = or_default(config.m, {1, 2, 3, 4});
  const auto n_grid = or_default(config.n_grid, {1, 2, 4, 8});
  const auto lambda_grid = or_default(config.lambda_grid, {1.0});
  const auto eps_grid = config.eps.empty() ? std::vector<double>{0.1} : config.eps;
  const bool unit = unit_rewards(r);

  struct Point {
    int m, n;
    double lambda, eps;
  };
  std::vector<Point> grid;
  for (int m : ms) {
    for (int n : n_grid) {
      for (double lambda : lambda_grid) {
        for (double eps : eps_grid) grid.push_back({m, n, lambda, eps});
      }
    }
  }
  std::vector<BlockwiseRow> rows(grid.size());
  parallel_queue(grid.size(), config.worker_count(), [&](std::size_t k) {
    const Point& pt = grid[k];
    const BlockModel block(p, r, pt.m);
    BlockwiseRow& row = rows[k];
    try {
      block.require_materializable();
      row.comparison = compare_symbolwise_blockwise(block, Temperature(pt.lambda), pt.n, pt.eps);
    } catch (const BudgetError& e) {
      rethrow_budget(e, "m=" + std::to_string(pt.m) + " n=" + std::to_string(pt.n) +
                            " lambda'=" + label_number(pt.lambda));
    }
    row.eps = pt.eps;
    const Temperature lam_block(pt.lambda / pt.m);
    row.bound_product_moment = blockwise_product_moment_bound(block, lam_block, pt.n);
    row.bound_cosh = unit ? blockwise_cosh_bound(block, lam_block, pt.n) : kNaN;
  });
  return rows;
}

CommandOutput cmd_blockwise(const ExperimentConfig& config) {
  const auto rows = blockwise_sweep(config);
  CommandOutput out;
  out.table.header = {"m",
                      "n",
                      "lambda_prime",
                      "lambda_block",
                      "eps",
                      "kl_symbolwise",
                      "kl_blockwise",
                      "reward_symbolwise",
                      "reward_blockwise",
                      "reward_target",
                      "bound_product_moment",
                      "bound_cosh",
                      "sample_complexity_n"};
  for (const auto& row : rows) {
    const auto& c = row.comparison;
    out.table.rows.push_back(
        {std::to_string(c.m), std::to_string(c.n), format_number(c.lambda_prime),
         format_number(c.lambda_block), format_number(row.eps), format_number(c.kl_symbolwise),
         format_number(c.kl_blockwise), format_number(c.reward_symbolwise),
         format_number(c.reward_blockwise), format_number(c.reward_target),
         format_number(row.bound_product_moment), format_number(row.bound_cosh),
         format_number(c.sample_complexity_n)});
  }
  if (config.plot_data) {
    Table plot;
    plot.header = {"series", "x", "y"};
    for (const auto& row : rows) {
      const auto& c = row.comparison;
      const std::string tag = "_m" + std::to_string(c.m) + "_lambda" + label_number(c.lambda_prime);
      plot.rows.push_back({"kl_symbolwise" + tag, std::to_string(c.n), format_number(c.kl_symbolwise)});
      plot.rows.push_back({"kl_blockwise" + tag, std::to_string(c.n), format_number(c.kl_blockwise)});
    }
    out.plot = std::move(plot);
  }
  return out;
}

// ---------------------------------------------------------------------------
// sample

namespace {

struct Policy {
  std::string strategy;
  SamplerKind kind;
  int n;
  double lambda;
  int m;
};

std::vector<double> exact_law(const Policy& policy, const BlockModel& block) {
  const auto& p = block.base();
  const auto& r = block.reward();
  auto flat = [](const FiniteDistribution& d) {
    return std::vector<double>(d.probs().begin(), d.probs().end());
  };
  auto seq = [](const SequenceDistribution& d) {
    return std::vector<double>(d.probs().begin(), d.probs().end());
  };
  switch (policy.kind) {
    case SamplerKind::BestOfN:
      return flat(exact_bon(p, r, policy.n));
    case SamplerKind::SoftBestOfN:
      return flat(exact_soft_bon(p, r, Temperature(policy.lambda), policy.n));
    case SamplerKind::BlockwiseSoftBestOfN:
      return seq(exact_blockwise_soft_bon(block, Temperature(policy.lambda), policy.n));
    case SamplerKind::BlockwiseBestOfN:
      return seq(exact_blockwise_bon(block, policy.n));
    case SamplerKind::SymbolwiseBestOfN:
      return seq(exact_symbolwise_bon(block, policy.n));
  }
  throw InternalError("unknown sampler kind");
}

}  // namespace

std::vector<SampleRow> sample_study(const ExperimentConfig& config) {
  if (!config.mc_draws) throw ConfigError("sample needs mc_draws (config key or --mc-draws)");
  const FiniteDistribution p = config.distribution();
  const RewardFunction r = config.reward();
  const auto n_grid = or_default(config.n_grid, {1, 2, 4});
  const auto lambda_grid = or_default(config.lambda_grid, {1.0});
  std::vector<std::string> strategies = config.strategies;
  if (strategies.empty()) {
    strategies = {"bon", "soft_bon"};
    if (!config.m.empty()) strategies.push_back("blockwise");
  }
  const std::vector<int> ms = config.m;

  std::vector<Policy> policies;
  for (const auto& s : strategies) {
    const bool sequences = s == "blockwise" || s == "blockwise_bon" || s == "symbolwise_bon";
    if (sequences && ms.empty()) throw ConfigError("strategy " + s + " needs m");
    for (int n : n_grid) {
      if (s == "bon") {
        policies.push_back({s, SamplerKind::BestOfN, n, kNaN, 1});
      } else if (s == "soft_bon") {
        for (double lam : lambda_grid) policies.push_back({s, SamplerKind::SoftBestOfN, n, lam, 1});
      } else if (s == "blockwise") {
        for (int m : ms) {
          for (double lam : lambda_grid) {
            policies.push_back({s, SamplerKind::BlockwiseSoftBestOfN, n, lam, m});
          }
        }
      } else {
        const auto kind = s == "blockwise_bon" ? SamplerKind::BlockwiseBestOfN
                                               : SamplerKind::SymbolwiseBestOfN;
        for (int m : ms) policies.push_back({s, kind, n, kNaN, m});
      }
    }
  }

  std::vector<SampleRow> rows;
  for (std::size_t k = 0; k < policies.size(); ++k) {
    const Policy& policy = policies[k];
    const BlockModel block(p, r, policy.m);
    const SamplerConfig sc{policy.kind, block, policy.n,
                           std::isnan(policy.lambda) ? 1.0 : policy.lambda};
    std::vector<double> exact;
    try {
      if (sc.draws_sequences()) block.require_materializable();
      exact = exact_law(policy, block);
    } catch (const BudgetError& e) {
      rethrow_budget(e, policy.strategy + " n=" + std::to_string(policy.n));
    }
    const auto emp =
        estimate_distribution(sc, *config.mc_draws, point_seed(config, k), config.worker_count());
    const auto freq = emp.frequencies();
    const double tv = kernel::tv_distance(freq, exact);
    for (std::size_t i = 0; i < exact.size(); ++i) {
      SampleRow row;
      row.strategy = policy.strategy;
      row.n = policy.n;
      row.lambda = policy.lambda;
      row.m = policy.m;
      if (sc.draws_sequences()) {
        for (std::size_t sym : decode_sequence(i, block.alphabet_size(), policy.m)) {
          if (!row.outcome.empty()) row.outcome += ' ';
          row.outcome += p.symbol(sym);
        }
      } else {
        row.outcome = p.symbol(i);
      }
      row.count = emp.counts[i];
      row.empirical = freq[i];
      row.exact = exact[i];
      row.tv_to_exact = tv;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

CommandOutput cmd_sample(const ExperimentConfig& config) {
  const auto rows = sample_study(config);
  CommandOutput out;
  out.table.header = {"strategy", "n",     "lambda", "m",          "outcome",
                      "count",    "empirical", "exact", "tv_to_exact"};
  for (const auto& row : rows) {
    out.table.rows.push_back({row.strategy, std::to_string(row.n), format_number(row.lambda),
                              std::to_string(row.m), row.outcome, std::to_string(row.count),
                              format_number(row.empirical), format_number(row.exact),
                              format_number(row.tv_to_exact)});
  }
  if (config.plot_data) {
    Table plot;
    plot.header = {"series", "x", "y"};
    for (const auto& row : rows) {
      std::string series = row.strategy + "_n" + std::to_string(row.n);
      if (!std::isnan(row.lambda)) series += "_lambda" + label_number(row.lambda);
      plot.rows.push_back({series + "_empirical", row.outcome, format_number(row.empirical)});
      plot.rows.push_back({series + "_exact", row.outcome, format_number(row.exact)});
    }
    out.plot = std::move(plot);
  }
  return out;
}

// ---------------------------------------------------------------------------
// output

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw ConfigError("cannot open '" + path + "' for writing");
  file << text;
  file.close();
  if (!file) throw ConfigError("failed writing '" + path + "'");
}

std::string plot_path(const std::string& out) {
  const auto slash = out.find_last_of('/');
  const auto dot = out.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
    return out.substr(0, dot) + "_plot" + out.substr(dot);
  }
  return out + "_plot.csv";
}

}  // namespace

void write_output(const CommandOutput& output, const ExperimentConfig& config) {
  if (output.plot && config.out.empty()) {
    throw ConfigError("--plot-data needs an output path (--out or the out key)");
  }
  if (config.out.empty()) {
    std::cout << output.table.to_csv();
    std::cout.flush();
  } else {
    write_file(config.out, output.table.to_csv());
  }
  if (output.plot) write_file(plot_path(config.out), output.plot->to_csv());
}

}  // namespace alignlab
