#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "alignlab/alphabet.hpp"
#include "alignlab/blockwise.hpp"
#include "alignlab/bounds.hpp"
#include "alignlab/config.hpp"
#include "alignlab/error.hpp"
#include "alignlab/exact.hpp"
#include "alignlab/experiments.hpp"
#include "alignlab/sampler.hpp"

namespace py = pybind11;
using namespace alignlab;

namespace {

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

FiniteDistribution dist(const std::vector<double>& probs) {
  return FiniteDistribution::from_probs(probs, 1e-9);
}

BlockModel block(const std::vector<double>& probs, const std::vector<double>& rewards, int m) {
  return BlockModel(dist(probs), RewardFunction(rewards), m);
}

SamplerKind kind_of(const std::string& name) {
  if (name == "bon") return SamplerKind::BestOfN;
  if (name == "soft_bon") return SamplerKind::SoftBestOfN;
  if (name == "blockwise") return SamplerKind::BlockwiseSoftBestOfN;
  if (name == "blockwise_bon") return SamplerKind::BlockwiseBestOfN;
  if (name == "symbolwise_bon") return SamplerKind::SymbolwiseBestOfN;
  throw DomainError("unknown strategy '" + name + "'");
}

py::dict command(const std::string& name, const std::string& config_text,
                 std::optional<std::uint64_t> seed, std::optional<std::uint64_t> mc_draws,
                 std::optional<unsigned> workers) {
  ExperimentConfig config = parse_config(config_text);
  ConfigOverrides overrides;
  overrides.seed = seed;
  overrides.mc_draws = mc_draws;
  overrides.workers = workers;
  apply_overrides(config, overrides);
  CommandOutput out;
  {
    py::gil_scoped_release release;
    if (name == "pareto") {
      out = cmd_pareto(config);
    } else if (name == "convergence") {
      out = cmd_convergence(config);
    } else if (name == "audit") {
      out = cmd_audit(config);
    } else if (name == "blockwise") {
      out = cmd_blockwise(config);
    } else if (name == "sample") {
      out = cmd_sample(config);
    } else {
      throw ConfigError("unknown command '" + name + "'");
    }
  }
  py::dict result;
  result["csv"] = out.table.to_csv();
  result["exit_code"] = out.exit_code;
  result["failures"] = out.failures;
  return result;
}

}  // namespace

PYBIND11_MODULE(_alignlab, m) {
  m.doc() = "Exact and sampled best-of-n / soft best-of-n on finite alphabets";

  // Translators run newest first, so the base class is registered first.
  auto& base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<BudgetError>(m, "BudgetError", base.ptr());
  py::register_exception<InternalError>(m, "InternalError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<BoundReport>(m, "BoundReport")
      .def_readonly("bound_name", &BoundReport::bound_name)
      .def_readonly("lhs", &BoundReport::lhs)
      .def_readonly("rhs", &BoundReport::rhs)
      .def_readonly("margin", &BoundReport::margin)
      .def_readonly("holds", &BoundReport::holds)
      .def_readonly("instance_digest", &BoundReport::instance_digest)
      .def_readonly("note", &BoundReport::note)
      .def("__repr__", [](const BoundReport& r) {
        return "<BoundReport " + r.bound_name + " lhs=" + format_number(r.lhs) +
               " rhs=" + format_number(r.rhs) + (r.holds ? " holds>" : " fails>");
      });

  py::class_<RateFit>(m, "RateFit")
      .def_readonly("grid", &RateFit::grid)
      .def_readonly("slope", &RateFit::slope)
      .def_readonly("intercept", &RateFit::intercept)
      .def_readonly("r_squared", &RateFit::r_squared);

  py::class_<SymbolBlockComparison>(m, "SymbolBlockComparison")
      .def_readonly("m", &SymbolBlockComparison::m)
      .def_readonly("n", &SymbolBlockComparison::n)
      .def_readonly("lambda_prime", &SymbolBlockComparison::lambda_prime)
      .def_readonly("lambda_block", &SymbolBlockComparison::lambda_block)
      .def_readonly("kl_symbolwise", &SymbolBlockComparison::kl_symbolwise)
      .def_readonly("kl_blockwise", &SymbolBlockComparison::kl_blockwise)
      .def_readonly("reward_symbolwise", &SymbolBlockComparison::reward_symbolwise)
      .def_readonly("reward_blockwise", &SymbolBlockComparison::reward_blockwise)
      .def_readonly("reward_target", &SymbolBlockComparison::reward_target)
      .def_readonly("sample_complexity_n", &SymbolBlockComparison::sample_complexity_n);

  // distributions
  m.def("tilt", [](const std::vector<double>& p, const std::vector<double>& r, double lam) {
    return to_vector(tilt(dist(p), RewardFunction(r), Temperature(lam)).probs());
  }, py::arg("probs"), py::arg("rewards"), py::arg("lam"));
  m.def("kl_divergence", [](const std::vector<double>& p, const std::vector<double>& q) {
    return kl_divergence(dist(p), dist(q));
  });
  m.def("tv_distance", [](const std::vector<double>& p, const std::vector<double>& q) {
    return tv_distance(dist(p), dist(q));
  });
  m.def("cv_squared_exp_reward", [](const std::vector<double>& p, const std::vector<double>& r,
                                    double lam) {
    return cv_squared_exp_reward(dist(p), RewardFunction(r), Temperature(lam));
  });

  // exact laws
  m.def("exact_soft_bon",
        [](const std::vector<double>& p, const std::vector<double>& r, double lam, int n,
           std::uint64_t max_terms) {
          return to_vector(
              exact_soft_bon(dist(p), RewardFunction(r), Temperature(lam), n, {max_terms}).probs());
        },
        py::arg("probs"), py::arg("rewards"), py::arg("lam"), py::arg("n"),
        py::arg("max_terms") = EnumerationBudget{}.max_terms);
  m.def("exact_bon", [](const std::vector<double>& p, const std::vector<double>& r, int n) {
    return to_vector(exact_bon(dist(p), RewardFunction(r), n).probs());
  }, py::arg("probs"), py::arg("rewards"), py::arg("n"));
  m.def("soft_bon_jensen_lower_bound",
        [](const std::vector<double>& p, const std::vector<double>& r, double lam, int n) {
          return soft_bon_jensen_lower_bound(dist(p), RewardFunction(r), Temperature(lam), n);
        });
  m.def("binary_kl_closed_form", [](double p, double lam, int n) {
    const auto c = binary_kl_closed_form(p, Temperature(lam), n);
    return py::make_tuple(c.leading_term, c.exact_coefficient);
  }, py::arg("p_success"), py::arg("lam"), py::arg("n"));
  m.def("composition_count", &composition_count);

  // bounds
  m.def("audit_kl_upper", [](const std::vector<double>& p, const std::vector<double>& r,
                             double lam, int n) {
    return audit_kl_upper(dist(p), RewardFunction(r), Temperature(lam), n);
  });
  m.def("audit_sinh_upper", [](const std::vector<double>& p, const std::vector<double>& r,
                               double lam, int n) {
    return audit_sinh_upper(dist(p), RewardFunction(r), Temperature(lam), n);
  });
  m.def("audit_relative_reward", [](const std::vector<double>& p, const std::vector<double>& r,
                                    double lam, int n) {
    return audit_relative_reward(dist(p), RewardFunction(r), Temperature(lam), n);
  });
  m.def("audit_pinsker", [](const std::vector<double>& p, const std::vector<double>& r,
                            double lam, int n) {
    return audit_pinsker(dist(p), RewardFunction(r), Temperature(lam), n);
  });
  m.def("lambda_threshold", &lambda_threshold, py::arg("n"), py::arg("eps"));
  m.def("blockwise_lambda_threshold", &blockwise_lambda_threshold, py::arg("n"), py::arg("eps"),
        py::arg("m"));
  m.def("sample_complexity_match", &sample_complexity_match, py::arg("lambda_prime"),
        py::arg("eps"), py::arg("m"));
  m.def("fit_rate", &fit_rate, py::arg("grid"));
  m.def("audit_blockwise_kl", [](const std::vector<double>& p, const std::vector<double>& r,
                                 int mm, double lam, int n) {
    return audit_blockwise_kl(block(p, r, mm), Temperature(lam), n);
  }, py::arg("probs"), py::arg("rewards"), py::arg("m"), py::arg("lam"), py::arg("n"));
  m.def("audit_blockwise_cosh", [](const std::vector<double>& p, const std::vector<double>& r,
                                   int mm, double lam, int n) {
    return audit_blockwise_cosh(block(p, r, mm), Temperature(lam), n);
  }, py::arg("probs"), py::arg("rewards"), py::arg("m"), py::arg("lam"), py::arg("n"));
  m.def("symbolwise_reward_analysis", [](double mu, int n, int mm, double delta) {
    const auto a = symbolwise_reward_analysis(mu, n, mm, delta);
    return py::make_tuple(a.p_n, a.chernoff_tail, a.lower_tail);
  }, py::arg("mu"), py::arg("n"), py::arg("m"), py::arg("delta"));

  // blockwise
  m.def("blockwise_tilt", [](const std::vector<double>& p, const std::vector<double>& r, int mm,
                             double lam) {
    return to_vector(blockwise_tilt(block(p, r, mm), Temperature(lam)).probs());
  }, py::arg("probs"), py::arg("rewards"), py::arg("m"), py::arg("lam"));
  m.def("exact_blockwise_soft_bon", [](const std::vector<double>& p, const std::vector<double>& r,
                                       int mm, double lam, int n) {
    return to_vector(exact_blockwise_soft_bon(block(p, r, mm), Temperature(lam), n).probs());
  }, py::arg("probs"), py::arg("rewards"), py::arg("m"), py::arg("lam"), py::arg("n"));
  m.def("compare_symbolwise_blockwise",
        [](const std::vector<double>& p, const std::vector<double>& r, int mm, double lam_prime,
           int n, double eps) {
          return compare_symbolwise_blockwise(block(p, r, mm), Temperature(lam_prime), n, eps);
        },
        py::arg("probs"), py::arg("rewards"), py::arg("m"), py::arg("lambda_prime"), py::arg("n"),
        py::arg("eps") = 0.1);

  // sampling
  m.def("estimate_distribution",
        [](const std::string& strategy, const std::vector<double>& p,
           const std::vector<double>& r, int n, double lam, int mm, std::uint64_t draws,
           std::uint64_t seed, std::uint64_t stream, unsigned workers) {
          const SamplerConfig sc{kind_of(strategy), block(p, r, mm), n, lam};
          py::gil_scoped_release release;
          return estimate_distribution(sc, draws, {seed, stream}, workers).counts;
        },
        py::arg("strategy"), py::arg("probs"), py::arg("rewards"), py::arg("n"),
        py::arg("lam") = 1.0, py::arg("m") = 1, py::arg("draws") = 100000, py::arg("seed") = 0,
        py::arg("stream") = 0, py::arg("workers") = 1);

  // experiments
  m.def("run_command", &command, py::arg("command"), py::arg("config_text"),
        py::arg("seed") = py::none(), py::arg("mc_draws") = py::none(),
        py::arg("workers") = py::none());
}
