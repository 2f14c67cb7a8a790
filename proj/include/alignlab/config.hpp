#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alignlab/distribution.hpp"
#include "alignlab/rng.hpp"

// Experiment configuration: flat `key = value` text, one entry per line,
// lists in brackets, `#` starts a comment.

namespace alignlab {

struct ExperimentConfig {
  std::vector<std::string> symbols;  // defaults to "0".."K-1"
  std::vector<double> probs;
  std::vector<double> rewards;
  std::vector<int> n_grid;
  std::vector<double> lambda_grid;
  std::vector<std::string> strategies;
  std::vector<int> m;
  std::optional<std::uint64_t> mc_draws;
  RngSeed seed;
  std::string out;  // empty: standard output

  // Extras.
  std::vector<double> eps{0.1};
  std::vector<std::string> suites;  // audit suites
  int audit_instances = 100;
  unsigned workers = 0;  // 0: hardware concurrency
  bool plot_data = false;

  bool has_instance() const noexcept { return !probs.empty(); }

  /// Base distribution and reward; throws ConfigError when absent or invalid.
  FiniteDistribution distribution() const;
  RewardFunction reward() const;

  bool uses(const std::string& strategy) const;
  unsigned worker_count() const;

  /// Checks shapes, ranges and names. Throws ConfigError.
  void validate() const;
};

/// Parses config text. Unknown keys, malformed values and duplicate keys
/// raise ConfigError with the offending line number.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config(const std::string& path);

/// Command-line overrides, applied over the file values.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::uint64_t> mc_draws;
  std::optional<unsigned> workers;
  bool plot_data = false;
};

void apply_overrides(ExperimentConfig& config, const ConfigOverrides& overrides);

/// Defaults used when the config leaves a grid empty.
std::vector<int> default_n_grid();
std::vector<double> default_lambda_grid();

}  // namespace alignlab
