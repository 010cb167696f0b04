// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "estimator.hpp"
#include "market.hpp"
#include "rng.hpp"

namespace covprice {

enum class PolicyKind {
  kGils,      // greedy iterated least squares on the market covariates
  kGilsBase,  // greedy iterated least squares ignoring covariates
  kGilsPlus,  // greedy on covariates plus appended uninformative ones
  kCils,      // greedy with a decaying forced deviation from the mean price
  kOracle,    // clairvoyant optimum under the true parameters
  kFixed,     // constant price
};

std::string_view to_string(PolicyKind kind);
std::optional<PolicyKind> parse_policy_kind(std::string_view name);

struct PolicySpec {
  PolicyKind kind = PolicyKind::kGils;
  // CILS deviation scale.
  double kappa = 0.1;
  // GILS+ synthetic covariates, drawn iid U[-extra_x_max, extra_x_max].
  std::size_t extra_dims = 1;
  double extra_x_max = 1.1447;
  // Overrides the default bootstrap length max(m_model + 1, 2).
  std::optional<std::size_t> bootstrap_periods;
  // Overrides the market's r_max when projecting (the other bounds are kept).
  std::optional<double> r_max;
  // Ablation: price from the raw estimate instead of its projection onto the
  // parameter space. A raw estimate with beta >= 0 prices at the upper bound.
  bool project_estimates = true;
  double fixed_price = 1.0;

  void validate() const;
};

/// A pricing policy for one episode. Call choose_price(x_t, t) then
/// observe(p_t, x_t, D_t) once per period, t = 1, 2, ...
class Policy {
 public:
  virtual ~Policy() = default;

  virtual double choose_price(std::span<const double> x, std::uint64_t t) = 0;
  virtual void observe(double price, std::span<const double> x, double demand) = 0;

  virtual PolicyKind kind() const = 0;

  // Learning-policy diagnostics; absent for non-learning policies or before
  // the estimate is identifiable. Estimates live in the policy's model space
  // (see model_truth()).
  virtual const LeastSquaresEstimator* estimator() const { return nullptr; }
  virtual std::optional<Theta> raw_estimate() const { return std::nullopt; }
  virtual std::optional<Theta> truncated_estimate() const { return std::nullopt; }

  // The true parameter expressed in the policy's model space: gamma padded
  // with zeros for appended covariates, dropped for the no-covariate model.
  virtual Theta model_truth(const Theta& truth) const { return truth; }
};

/// Throws ConfigError for a spec inconsistent with the market.
// CILS price: the greedy price when it deviates from the running mean price
// by at least kappa * t^(-1/4), otherwise the mean pushed out to that
// distance on the greedy side (sign(0) = +1), clamped to the bounds.
double constrained_price(double greedy, double mean_price, double kappa, std::uint64_t t, const PriceBounds& bounds);

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const MarketConfig& market, std::uint64_t episode_seed);

}  // namespace covprice
