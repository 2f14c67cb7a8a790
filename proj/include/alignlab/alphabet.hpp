#pragma once

#include <span>
#include <vector>

#include "alignlab/distribution.hpp"

// Finite-alphabet primitives: exponential tilting, divergences and moments.
// All logarithms are natural.

namespace alignlab {

namespace kernel {

/// log(sum_i exp(x_i)) with max-shift; -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> x);

/// log(exp(a) + exp(b)).
double log_add_exp(double a, double b);

/// log E_p[exp(scale * r(X))].
double log_mgf(std::span<const double> p, std::span<const double> r, double scale);

/// p(x) exp(r(x)/lambda), normalized, evaluated in the log domain.
std::vector<double> tilt(std::span<const double> p, std::span<const double> r, double lambda);

/// sum p log(p/q); +inf on an absolute-continuity failure.
double kl_divergence(std::span<const double> p, std::span<const double> q);

double tv_distance(std::span<const double> p, std::span<const double> q);

double dot(std::span<const double> p, std::span<const double> r);

/// E[e^{2r/lambda}] / E[e^{r/lambda}]^2 - 1.
double cv_squared_exp_reward(std::span<const double> p, std::span<const double> r,
                             double lambda);

}  // namespace kernel

/// The tilted distribution P*_lambda(x) = P(x) e^{r(x)/lambda} / E_P[e^{r/lambda}].
FiniteDistribution tilt(const FiniteDistribution& p, const RewardFunction& r, Temperature lam);

/// D_KL(p || q) in nats. Returns +infinity when p puts mass where q has none.
double kl_divergence(const FiniteDistribution& p, const FiniteDistribution& q);

double tv_distance(const FiniteDistribution& p, const FiniteDistribution& q);

double expected_reward(const FiniteDistribution& p, const RewardFunction& r);

/// Squared coefficient of variation of e^{r(X)/lambda} under p.
double cv_squared_exp_reward(const FiniteDistribution& p, const RewardFunction& r,
                             Temperature lam);

}  // namespace alignlab
