#pragma once

#include <optional>
#include <string>
#include <vector>

#include "alignlab/blockwise.hpp"
#include "alignlab/bounds.hpp"
#include "alignlab/config.hpp"
#include "alignlab/distribution.hpp"

namespace alignlab {

/// CSV number formatting: 12 significant digits, `inf` / `-inf`, and an empty
/// field for NaN (a column that does not apply to the row).
std::string format_number(double value);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Header row plus data rows, comma separated, `\n` terminated.
  std::string to_csv() const;
};

struct CommandOutput {
  Table table;
  std::optional<Table> plot;  // long format: series, x, y
  std::vector<std::string> failures;
  int exit_code = 0;
};

// --- pareto -----------------------------------------------------------------

struct SweepRow {
  std::string strategy;  // frontier, bon, soft_bon, blockwise_m<M>
  int n = 0;
  double lambda = 0.0;
  double kl_to_base = 0.0;
  double kl_to_tilted = 0.0;
  double tv_to_tilted = 0.0;
  double expected_reward = 0.0;
  double bound_thm1 = 0.0;
  double bound_sinh = 0.0;
  double bound_thm3_lhs = 0.0;
  double bound_thm3_rhs = 0.0;
  std::string mode;  // exact or mc
};

/// Closest point of the tilted family to q: argmin over lambda of
/// D_KL(P*_lambda || q), found by a log-spaced scan and golden-section refinement.
struct FrontierMatch {
  double lambda = 0.0;
  double kl = 0.0;
  double tv = 0.0;
};

FrontierMatch nearest_frontier_point(const FiniteDistribution& p, const RewardFunction& r,
                                     const FiniteDistribution& q);

/// Log-spaced temperatures used for the frontier rows (an infinite-temperature
/// row is appended separately).
std::vector<double> frontier_lambda_grid();

std::vector<SweepRow> pareto_sweep(const ExperimentConfig& config);

// --- convergence ------------------------------------------------------------

struct ConvergencePoint {
  double lambda = 0.0;
  int n = 0;
  double kl = 0.0;
  double tv = 0.0;
  double bound_thm1 = 0.0;
  double bound_sinh = 0.0;
};

struct ConvergenceStudy {
  double lambda = 0.0;
  std::vector<ConvergencePoint> points;
  RateFit kl_fit;
  RateFit tv_fit;
};

std::vector<ConvergenceStudy> convergence_study(const ExperimentConfig& config);

// --- audit ------------------------------------------------------------------

struct AuditRow {
  std::string instance;
  BoundReport report;
  bool error = false;  // the audit raised instead of producing a comparison
};

/// A random instance of the regression suite: K in {2, 3, 4}, flat Dirichlet
/// masses, rewards uniform on [0, 1]. Deterministic in (seed, index).
struct RandomInstance {
  std::vector<double> probs;
  std::vector<double> rewards;
};

RandomInstance random_instance(std::uint64_t seed, int index, int min_k = 2, int max_k = 4);

std::vector<double> audit_lambda_grid();
std::vector<int> audit_n_grid();
std::vector<double> audit_eps_grid();

std::vector<AuditRow> audit_suite(const ExperimentConfig& config);

// --- blockwise --------------------------------------------------------------

struct BlockwiseRow {
  SymbolBlockComparison comparison;
  double eps = 0.0;
  double bound_product_moment = 0.0;
  double bound_cosh = 0.0;
};

std::vector<BlockwiseRow> blockwise_sweep(const ExperimentConfig& config);

// --- sample -----------------------------------------------------------------

struct SampleRow {
  std::string strategy;
  int n = 0;
  double lambda = 0.0;
  int m = 1;
  std::string outcome;
  std::uint64_t count = 0;
  double empirical = 0.0;
  double exact = 0.0;
  double tv_to_exact = 0.0;
};

std::vector<SampleRow> sample_study(const ExperimentConfig& config);

// --- commands ---------------------------------------------------------------

CommandOutput cmd_pareto(const ExperimentConfig& config);
CommandOutput cmd_convergence(const ExperimentConfig& config);
CommandOutput cmd_audit(const ExperimentConfig& config);
CommandOutput cmd_blockwise(const ExperimentConfig& config);
CommandOutput cmd_sample(const ExperimentConfig& config);

/// Writes the table to config.out (standard output when empty) and the plot
/// table, if any, next to it as <stem>_plot.csv. Throws ConfigError when a
/// path cannot be written.
void write_output(const CommandOutput& output, const ExperimentConfig& config);

}  // namespace alignlab
