// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

#include "policies.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "errors.hpp"

namespace covprice {

namespace {

constexpr std::array<std::pair<PolicyKind, std::string_view>, 6> kPolicyNames{{
    {PolicyKind::kGils, "gils"},
    {PolicyKind::kGilsBase, "gils_base"},
    {PolicyKind::kGilsPlus, "gils_plus"},
    {PolicyKind::kCils, "cils"},
    {PolicyKind::kOracle, "oracle"},
    {PolicyKind::kFixed, "fixed"},
}};

void check_period(std::span<const double> x, std::size_t m, std::uint64_t t) {
  if (t == 0) throw InvalidParameter("periods are numbered from 1");
  if (x.size() != m)
    throw ConfigError("policy expects " + std::to_string(m) + " covariates, got " + std::to_string(x.size()));
}

class OraclePolicy final : public Policy {
 public:
  explicit OraclePolicy(const MarketConfig& market) : market_(market) {}

  double choose_price(std::span<const double> x, std::uint64_t t) override {
    check_period(x, market_.m(), t);
    return optimal_price(market_.true_theta, market_.a_prime, market_.p0, x, market_.bounds);
  }
  void observe(double, std::span<const double>, double) override {}
  PolicyKind kind() const override { return PolicyKind::kOracle; }

 private:
  const MarketConfig& market_;
};

class FixedPricePolicy final : public Policy {
 public:
  FixedPricePolicy(double price, std::size_t m) : price_(price), m_(m) {}

  double choose_price(std::span<const double> x, std::uint64_t t) override {
    check_period(x, m_, t);
    return price_;
  }
  void observe(double, std::span<const double>, double) override {}
  PolicyKind kind() const override { return PolicyKind::kFixed; }

 private:
  double price_;
  std::size_t m_;
};

// The GILS family. The model covariate vector z is
//   GILS, CILS: z = x
//   GILS-base:  z = ()
//   GILS+:      z = (x, w) with w iid uniform, drawn by the policy
// and the price is the myopic optimum under the truncated estimate.
class GreedyPolicy final : public Policy {
 public:
  GreedyPolicy(const PolicySpec& spec, const MarketConfig& market, std::uint64_t episode_seed)
      : spec_(spec),
        market_(market),
        space_(market.space),
        market_dim_(market.m()),
        model_dim_(model_dim(spec, market.m())),
        estimator_(model_dim_),
        bootstrap_(spec.bootstrap_periods.value_or(std::max<std::size_t>(model_dim_ + 1, 2))),
        z_(model_dim_, 0.0),
        bootstrap_rng_(make_rng(episode_seed, Stream::kPolicy)),
        synthetic_rng_(make_rng(episode_seed, Stream::kSyntheticCovariates)) {
    if (spec.r_max) space_.r_max = *spec.r_max;
    space_.validate();
  }

  double choose_price(std::span<const double> x, std::uint64_t t) override {
    check_period(x, market_dim_, t);
    fill_model_covariates(x);
    ++period_;
    if (!truncated_) {
      std::uniform_real_distribution<double> u(market_.bounds.lower, market_.bounds.upper);
      return u(bootstrap_rng_);
    }
    const double greedy = truncated_->beta < 0.0
                              ? optimal_price(*truncated_, market_.a_prime, market_.p0, z_, market_.bounds)
                              : market_.bounds.upper;
    if (spec_.kind != PolicyKind::kCils) return greedy;
    return constrained_price(greedy, mean_price_, spec_.kappa, t, market_.bounds);
  }

  void observe(double price, std::span<const double> x, double demand) override {
    if (x.size() != market_dim_) throw ConfigError("observation covariate dimension mismatch");
    if (period_ != estimator_.count() + 1) throw InvalidParameter("observe must follow choose_price");
    estimator_.update(price, z_, demand, market_.a_prime, market_.p0);
    mean_price_ += (price - mean_price_) / static_cast<double>(estimator_.count());
    if (estimator_.count() >= bootstrap_) {
      raw_ = estimator_.solve();
      if (raw_) truncated_ = spec_.project_estimates ? project(*raw_, space_) : *raw_;
    }
  }

  PolicyKind kind() const override { return spec_.kind; }
  const LeastSquaresEstimator* estimator() const override { return &estimator_; }
  std::optional<Theta> raw_estimate() const override { return raw_; }
  std::optional<Theta> truncated_estimate() const override { return truncated_; }

  Theta model_truth(const Theta& truth) const override {
    Theta t{truth.beta, {}};
    if (spec_.kind == PolicyKind::kGilsBase) return t;
    t.gamma = truth.gamma;
    t.gamma.resize(model_dim_, 0.0);
    return t;
  }

 private:
  static std::size_t model_dim(const PolicySpec& spec, std::size_t m) {
    switch (spec.kind) {
      case PolicyKind::kGilsBase:
        return 0;
      case PolicyKind::kGilsPlus:
        return m + spec.extra_dims;
      default:
        return m;
    }
  }

  void fill_model_covariates(std::span<const double> x) {
    if (spec_.kind == PolicyKind::kGilsBase) return;
    std::copy(x.begin(), x.end(), z_.begin());
    if (spec_.kind == PolicyKind::kGilsPlus) {
      std::uniform_real_distribution<double> u(-spec_.extra_x_max, spec_.extra_x_max);
      for (std::size_t i = market_dim_; i < model_dim_; ++i) z_[i] = u(synthetic_rng_);
    }
  }

  PolicySpec spec_;
  const MarketConfig& market_;
  ParamSpace space_;
  std::size_t market_dim_;
  std::size_t model_dim_;
  LeastSquaresEstimator estimator_;
  std::size_t bootstrap_;
  std::vector<double> z_;
  Rng bootstrap_rng_;
  Rng synthetic_rng_;
  std::uint64_t period_ = 0;
  double mean_price_ = 0.0;
  std::optional<Theta> raw_;
  std::optional<Theta> truncated_;
};

}  // namespace

std::string_view to_string(PolicyKind kind) {
  for (const auto& [k, name] : kPolicyNames)
    if (k == kind) return name;
  return "unknown";
}

std::optional<PolicyKind> parse_policy_kind(std::string_view name) {
  for (const auto& [k, n] : kPolicyNames)
    if (n == name) return k;
  return std::nullopt;
}

double constrained_price(double greedy, double mean_price, double kappa, std::uint64_t t, const PriceBounds& bounds) {
  const double floor = kappa * std::pow(static_cast<double>(t), -0.25);
  const double gap = greedy - mean_price;
  if (std::abs(gap) >= floor) return greedy;
  const double sign = gap >= 0.0 ? 1.0 : -1.0;
  return bounds.clamp(mean_price + sign * floor);
}

void PolicySpec::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ConfigError("CILS kappa must be positive");
  if (kind == PolicyKind::kGilsPlus && !(extra_x_max > 0.0)) throw ConfigError("GILS+ needs extra_x_max > 0");
  if (bootstrap_periods && *bootstrap_periods == 0) throw ConfigError("bootstrap length must be >= 1");
  if (r_max && !(*r_max >= 0.0)) throw ConfigError("policy r_max must be >= 0");
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const MarketConfig& market, std::uint64_t episode_seed) {
  spec.validate();
  switch (spec.kind) {
    case PolicyKind::kOracle:
      return std::make_unique<OraclePolicy>(market);
    case PolicyKind::kFixed:
      if (!market.bounds.contains(spec.fixed_price)) throw ConfigError("fixed price outside the price bounds");
      return std::make_unique<FixedPricePolicy>(spec.fixed_price, market.m());
    default:
      return std::make_unique<GreedyPolicy>(spec, market, episode_seed);
  }
}

}  // namespace covprice
