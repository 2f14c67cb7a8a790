#include "alignlab/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "alignlab/error.hpp"

namespace alignlab {

namespace {

const std::set<std::string> kStrategies = {"bon", "soft_bon", "blockwise", "blockwise_bon",
                                           "symbolwise_bon"};
const std::set<std::string> kSuites = {"random", "blockwise", "monte_carlo", "instance"};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

struct Value {
  int line = 0;
  std::string key;
  std::vector<std::string> items;
  bool is_list = false;

  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError("line " + std::to_string(line) + ": " + key + ": " + why);
  }

  const std::string& scalar() const {
    if (is_list || items.size() != 1) fail("expected a single value");
    return items.front();
  }
};

double to_double(const Value& v, const std::string& s) {
  if (s.empty()) v.fail("empty number");
  errno = 0;
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) v.fail("not a number: '" + s + "'");
  return out;
}

std::uint64_t to_u64(const Value& v, const std::string& s) {
  if (s.empty() || s.front() == '-') v.fail("not a nonnegative integer: '" + s + "'");
  errno = 0;
  char* end = nullptr;
  const unsigned long long out = std::strtoull(s.c_str(), &end, 0);
  if (end != s.c_str() + s.size() || errno == ERANGE) {
    v.fail("not a nonnegative integer: '" + s + "'");
  }
  return out;
}

int to_int(const Value& v, const std::string& s) {
  const std::uint64_t out = to_u64(v, s);
  if (out > 1'000'000'000ULL) v.fail("integer out of range: '" + s + "'");
  return static_cast<int>(out);
}

std::vector<double> doubles(const Value& v) {
  std::vector<double> out;
  for (const auto& s : v.items) out.push_back(to_double(v, s));
  return out;
}

std::vector<int> ints(const Value& v) {
  std::vector<int> out;
  for (const auto& s : v.items) out.push_back(to_int(v, s));
  return out;
}

bool to_bool(const Value& v) {
  const std::string& s = v.scalar();
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  v.fail("expected true or false");
}

Value parse_line(const std::string& raw, int line) {
  Value v;
  v.line = line;
  const auto eq = raw.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'");
  }
  v.key = trim(raw.substr(0, eq));
  if (v.key.empty()) throw ConfigError("line " + std::to_string(line) + ": missing key");
  const std::string body = trim(raw.substr(eq + 1));
  if (!body.empty() && body.front() == '[') {
    if (body.back() != ']') v.fail("unterminated list");
    v.is_list = true;
    const std::string inner = trim(body.substr(1, body.size() - 2));
    if (!inner.empty()) {
      std::stringstream ss(inner);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = unquote(trim(item));
        if (item.empty()) v.fail("empty list element");
        v.items.push_back(item);
      }
      if (inner.back() == ',') v.fail("empty list element");
    }
  } else {
    if (body.empty()) v.fail("missing value");
    v.items.push_back(unquote(body));
  }
  return v;
}

}  // namespace

std::vector<int> default_n_grid() { return {1, 2, 4, 8, 16, 32, 64}; }

std::vector<double> default_lambda_grid() {
  std::vector<double> out;
  const double lo = std::log(0.05), hi = std::log(5.0);
  for (int i = 0; i < 20; ++i) out.push_back(std::exp(lo + (hi - lo) * i / 19.0));
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::set<std::string> seen;
  std::stringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    if (trim(raw).empty()) continue;
    const Value v = parse_line(raw, line);
    if (!seen.insert(v.key).second) v.fail("duplicate key");

    if (v.key == "symbols") {
      config.symbols = v.items;
    } else if (v.key == "probs") {
      config.probs = doubles(v);
    } else if (v.key == "rewards") {
      config.rewards = doubles(v);
    } else if (v.key == "n_grid") {
      config.n_grid = ints(v);
    } else if (v.key == "lambda_grid") {
      config.lambda_grid = doubles(v);
    } else if (v.key == "strategies") {
      config.strategies = v.items;
    } else if (v.key == "m") {
      config.m = ints(v);
    } else if (v.key == "mc_draws") {
      config.mc_draws = to_u64(v, v.scalar());
    } else if (v.key == "seed") {
      config.seed.seed = to_u64(v, v.scalar());
    } else if (v.key == "stream") {
      config.seed.stream = to_u64(v, v.scalar());
    } else if (v.key == "out") {
      config.out = v.scalar();
    } else if (v.key == "eps") {
      config.eps = doubles(v);
    } else if (v.key == "suites") {
      config.suites = v.items;
    } else if (v.key == "audit_instances") {
      config.audit_instances = to_int(v, v.scalar());
    } else if (v.key == "workers") {
      config.workers = static_cast<unsigned>(to_int(v, v.scalar()));
    } else if (v.key == "plot_data") {
      config.plot_data = to_bool(v);
    } else {
      v.fail("unknown key");
    }
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void apply_overrides(ExperimentConfig& config, const ConfigOverrides& overrides) {
  if (overrides.seed) config.seed.seed = *overrides.seed;
  if (overrides.out) config.out = *overrides.out;
  if (overrides.mc_draws) config.mc_draws = *overrides.mc_draws;
  if (overrides.workers) config.workers = *overrides.workers;
  if (overrides.plot_data) config.plot_data = true;
  config.validate();
}

void ExperimentConfig::validate() const {
  if (probs.empty() != rewards.empty()) {
    throw ConfigError("probs and rewards must be given together");
  }
  if (!probs.empty()) {
    if (probs.size() != rewards.size()) {
      throw ConfigError("probs has " + std::to_string(probs.size()) + " entries but rewards has " +
                        std::to_string(rewards.size()));
    }
    if (!symbols.empty() && symbols.size() != probs.size()) {
      throw ConfigError("symbols has " + std::to_string(symbols.size()) +
                        " entries but probs has " + std::to_string(probs.size()));
    }
    (void)distribution();
    (void)reward();
  } else if (!symbols.empty()) {
    throw ConfigError("symbols given without probs");
  }
  for (int n : n_grid) {
    if (n < 1) throw ConfigError("n_grid entries must be at least 1");
  }
  for (double lam : lambda_grid) {
    if (!(lam > 0.0) || !std::isfinite(lam)) {
      throw ConfigError("lambda_grid entries must be finite and positive");
    }
  }
  for (const auto& s : strategies) {
    if (!kStrategies.count(s)) throw ConfigError("unknown strategy '" + s + "'");
  }
  for (int block : m) {
    if (block < 1) throw ConfigError("m must be at least 1");
  }
  for (double e : eps) {
    if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("eps entries must be positive");
  }
  for (const auto& s : suites) {
    if (!kSuites.count(s)) throw ConfigError("unknown audit suite '" + s + "'");
  }
  if (mc_draws && *mc_draws < 1) throw ConfigError("mc_draws must be at least 1");
  if (audit_instances < 1) throw ConfigError("audit_instances must be at least 1");
}

FiniteDistribution ExperimentConfig::distribution() const {
  if (probs.empty()) throw ConfigError("config has no instance (probs and rewards)");
  try {
    if (symbols.empty()) return FiniteDistribution::from_probs(probs, 1e-9);
    return FiniteDistribution(symbols, probs, 1e-9);
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid probs: ") + e.what());
  }
}

RewardFunction ExperimentConfig::reward() const {
  if (rewards.empty()) throw ConfigError("config has no instance (probs and rewards)");
  try {
    return RewardFunction(rewards);
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid rewards: ") + e.what());
  }
}

bool ExperimentConfig::uses(const std::string& strategy) const {
  return std::find(strategies.begin(), strategies.end(), strategy) != strategies.end();
}

unsigned ExperimentConfig::worker_count() const {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

}  // namespace alignlab
