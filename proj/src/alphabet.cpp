#include "alignlab/alphabet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "alignlab/error.hpp"

namespace alignlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::shared_ptr<const std::vector<std::string>> index_symbols(std::size_t k) {
  std::vector<std::string> names;
  names.reserve(k);
  for (std::size_t i = 0; i < k; ++i) names.push_back(std::to_string(i));
  return std::make_shared<const std::vector<std::string>>(std::move(names));
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": size mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// FiniteDistribution / RewardFunction / Temperature

FiniteDistribution::FiniteDistribution(std::vector<std::string> symbols,
                                       std::vector<double> probs, double tolerance)
    : FiniteDistribution(std::make_shared<const std::vector<std::string>>(std::move(symbols)),
                         std::move(probs), tolerance) {}

FiniteDistribution::FiniteDistribution(std::shared_ptr<const std::vector<std::string>> symbols,
                                       std::vector<double> probs, double tolerance)
    : symbols_(std::move(symbols)), probs_(std::move(probs)) {
  validate(tolerance);
}

FiniteDistribution FiniteDistribution::from_probs(std::vector<double> probs, double tolerance) {
  auto names = index_symbols(probs.size());
  return FiniteDistribution(std::move(names), std::move(probs), tolerance);
}

FiniteDistribution FiniteDistribution::on_alphabet_of(const FiniteDistribution& like,
                                                      std::vector<double> probs,
                                                      double tolerance) {
  return FiniteDistribution(like.symbols_, std::move(probs), tolerance);
}

void FiniteDistribution::validate(double tolerance) const {
  if (probs_.empty()) throw DomainError("distribution over an empty alphabet");
  require_same_size(symbols_->size(), probs_.size(), "distribution symbols/probs");
  double total = 0.0;
  for (double v : probs_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw DomainError("distribution has a negative or non-finite mass");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > tolerance) {
    throw DomainError("distribution masses sum to " + std::to_string(total) + ", not 1");
  }
  // Large generated alphabets are unique by construction; checking them costs
  // more than everything else we do with them.
  if (symbols_->size() <= 4096) {
    std::set<std::string> seen(symbols_->begin(), symbols_->end());
    if (seen.size() != symbols_->size()) throw DomainError("duplicate symbol in alphabet");
  }
}

std::optional<std::size_t> FiniteDistribution::index_of(const std::string& symbol) const {
  auto it = std::find(symbols_->begin(), symbols_->end(), symbol);
  if (it == symbols_->end()) return std::nullopt;
  return static_cast<std::size_t>(it - symbols_->begin());
}

bool FiniteDistribution::same_alphabet(const FiniteDistribution& other) const {
  return symbols_ == other.symbols_ || *symbols_ == *other.symbols_;
}

RewardFunction::RewardFunction(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DomainError("reward over an empty alphabet");
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("reward values must be finite");
  }
}

double RewardFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }
double RewardFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool RewardFunction::in_unit_interval() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return v >= 0.0 && v <= 1.0; });
}

Temperature::Temperature(double lambda) : lambda_(lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("temperature must be finite and strictly positive");
  }
}

void require_aligned(const FiniteDistribution& p, const RewardFunction& r) {
  require_same_size(p.size(), r.size(), "reward/distribution");
}

void require_unit_rewards(const FiniteDistribution& p, const RewardFunction& r) {
  require_aligned(p, r);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] >= 0.0 && r[i] <= 1.0)) {
      throw PreconditionError("reward of symbol '" + p.symbol(i) + "' is " +
                              std::to_string(r[i]) + ", outside [0, 1]");
    }
  }
}

// ---------------------------------------------------------------------------
// kernels

namespace kernel {

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return -kInf;
  const double hi = *std::max_element(x.begin(), x.end());
  if (hi == -kInf) return -kInf;
  if (hi == kInf) return kInf;
  double s = 0.0;
  for (double v : x) s += std::exp(v - hi);
  return hi + std::log(s);
}

double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -kInf) return a;
  return a + std::log1p(std::exp(b - a));
}

double log_mgf(std::span<const double> p, std::span<const double> r, double scale) {
  require_same_size(p.size(), r.size(), "log_mgf");
  std::vector<double> terms(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    terms[i] = p[i] > 0.0 ? std::log(p[i]) + scale * r[i] : -kInf;
  }
  return log_sum_exp(terms);
}

std::vector<double> tilt(std::span<const double> p, std::span<const double> r, double lambda) {
  require_same_size(p.size(), r.size(), "tilt");
  std::vector<double> logw(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    logw[i] = p[i] > 0.0 ? std::log(p[i]) + r[i] / lambda : -kInf;
  }
  const double norm = log_sum_exp(logw);
  if (!std::isfinite(norm)) throw InternalError("tilt: no mass left to normalize");
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = std::exp(logw[i] - norm);
  return out;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  require_same_size(p.size(), q.size(), "kl_divergence");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return kInf;
    total += p[i] * std::log(p[i] / q[i]);
  }
  // Rounding can push a true zero slightly negative.
  return std::max(total, 0.0);
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  require_same_size(p.size(), q.size(), "tv_distance");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += std::abs(p[i] - q[i]);
  return std::min(0.5 * total, 1.0);
}

double dot(std::span<const double> p, std::span<const double> r) {
  require_same_size(p.size(), r.size(), "expected_reward");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += p[i] * r[i];
  return total;
}

double cv_squared_exp_reward(std::span<const double> p, std::span<const double> r,
                             double lambda) {
  const double second = log_mgf(p, r, 2.0 / lambda);
  const double first = log_mgf(p, r, 1.0 / lambda);
  return std::max(std::expm1(second - 2.0 * first), 0.0);
}

}  // namespace kernel

// ---------------------------------------------------------------------------
// typed operations

FiniteDistribution tilt(const FiniteDistribution& p, const RewardFunction& r, Temperature lam) {
  require_aligned(p, r);
  return FiniteDistribution::on_alphabet_of(p, kernel::tilt(p.probs(), r.values(), lam.value()));
}

double kl_divergence(const FiniteDistribution& p, const FiniteDistribution& q) {
  if (!p.same_alphabet(q)) throw DimensionError("kl_divergence: different alphabets");
  return kernel::kl_divergence(p.probs(), q.probs());
}

double tv_distance(const FiniteDistribution& p, const FiniteDistribution& q) {
  if (!p.same_alphabet(q)) throw DimensionError("tv_distance: different alphabets");
  return kernel::tv_distance(p.probs(), q.probs());
}

double expected_reward(const FiniteDistribution& p, const RewardFunction& r) {
  require_aligned(p, r);
  return kernel::dot(p.probs(), r.values());
}

double cv_squared_exp_reward(const FiniteDistribution& p, const RewardFunction& r,
                             Temperature lam) {
  require_aligned(p, r);
  return kernel::cv_squared_exp_reward(p.probs(), r.values(), lam.value());
}

}  // namespace alignlab
