#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "alignlab/config.hpp"
#include "alignlab/error.hpp"
#include "alignlab/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"align-lab: exact and sampled best-of-n / soft best-of-n experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out;
  std::uint64_t mc_draws = 0;
  unsigned workers = 0;
  bool plot_data = false;

  const char* commands[][2] = {
      {"pareto", "reward vs KL sweep against the tilted frontier"},
      {"convergence", "exact KL / TV against n with fitted rates"},
      {"audit", "check every bound on a batch of instances"},
      {"blockwise", "symbolwise vs blockwise soft best-of-n at matched operating points"},
      {"sample", "Monte Carlo samplers against their exact laws"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", out, "output CSV path (default: standard output)");
    sub->add_option("--mc-draws", mc_draws, "Monte Carlo draws (overrides the config)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--workers", workers, "worker threads (default: all cores)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--plot-data", plot_data, "also write <stem>_plot.csv (series, x, y)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommands().front();
  try {
    alignlab::ExperimentConfig config = alignlab::load_config(config_path);
    alignlab::ConfigOverrides overrides;
    if (sub->count("--seed")) overrides.seed = seed;
    if (sub->count("--out")) overrides.out = out;
    if (sub->count("--mc-draws")) overrides.mc_draws = mc_draws;
    if (sub->count("--workers")) overrides.workers = workers;
    overrides.plot_data = plot_data;
    alignlab::apply_overrides(config, overrides);

    alignlab::CommandOutput output;
    if (command == "pareto") {
      output = alignlab::cmd_pareto(config);
    } else if (command == "convergence") {
      output = alignlab::cmd_convergence(config);
    } else if (command == "audit") {
      output = alignlab::cmd_audit(config);
    } else if (command == "blockwise") {
      output = alignlab::cmd_blockwise(config);
    } else {
      output = alignlab::cmd_sample(config);
    }
    alignlab::write_output(output, config);
    for (const auto& failure : output.failures) std::cerr << "FAIL " << failure << '\n';
    if (!output.failures.empty()) {
      std::cerr << output.failures.size() << " of " << output.table.rows.size()
                << " audits failed\n";
    }
    return output.exit_code;
  } catch (const alignlab::ConfigError& e) {
    std::cerr << "align-lab: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const alignlab::BudgetError& e) {
    std::cerr << "align-lab: budget error: " << e.what() << " (needs " << e.required()
              << ", limit " << e.limit() << ")\n";
    return kExitBudget;
  } catch (const alignlab::Error& e) {
    std::cerr << "align-lab: " << e.what() << '\n';
    return 1;
  }
}
