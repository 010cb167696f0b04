// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

#include "market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "errors.hpp"

namespace covprice {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want)
    throw ConfigError(std::string(what) + ": covariate dimension " + std::to_string(got) + " does not match " +
                      std::to_string(want));
}

CovarianceSpectrum default_spectrum(const CovariateSource::Kind&) { return {}; }

}  // namespace

std::vector<double> Theta::flatten() const {
  std::vector<double> v;
  v.reserve(gamma.size() + 1);
  v.push_back(beta);
  v.insert(v.end(), gamma.begin(), gamma.end());
  return v;
}

Theta Theta::unflatten(std::span<const double> v) {
  if (v.empty()) throw InvalidParameter("parameter vector must have at least the price coefficient");
  return Theta{v[0], std::vector<double>(v.begin() + 1, v.end())};
}

double distance_sq(const Theta& a, const Theta& b) {
  require_dim(a.dim(), b.dim(), "distance");
  double s = (a.beta - b.beta) * (a.beta - b.beta);
  for (std::size_t i = 0; i < a.dim(); ++i) s += (a.gamma[i] - b.gamma[i]) * (a.gamma[i] - b.gamma[i]);
  return s;
}

void ParamSpace::validate() const {
  if (!(b_min <= b_max)) throw ConfigError("parameter space needs b_min <= b_max");
  if (!(b_max < 0.0)) throw ConfigError("parameter space needs b_max < 0");
  if (!(r_max >= 0.0) || std::isnan(r_max)) throw ConfigError("parameter space needs r_max >= 0");
}

bool ParamSpace::contains(const Theta& theta, double tol) const {
  return theta.beta >= b_min - tol && theta.beta <= b_max + tol && norm2(theta.gamma) <= r_max + tol;
}

void PriceBounds::validate() const {
  if (!(lower >= 0.0)) throw ConfigError("price lower bound must be >= 0");
  if (!(lower < upper) || !std::isfinite(upper)) throw ConfigError("price bounds need lower < upper < infinity");
}

double PriceBounds::clamp(double p) const noexcept { return std::clamp(p, lower, upper); }

CovariateSource::CovariateSource(Kind kind, std::optional<CovarianceSpectrum> declared)
    : kind_(std::move(kind)), declared_(declared.value_or(default_spectrum(kind_))) {
  std::visit(Overloaded{
                 [](const IidUniformCovariates& k) {
                   if (!(k.x_max > 0.0)) throw ConfigError("uniform covariates need x_max > 0");
                 },
                 [](const IidCustomCovariates& k) {
                   for (const auto& s : k.samplers)
                     if (!s) throw ConfigError("custom covariate sampler is empty");
                 },
                 [](const MartingaleCovariates& k) {
                   if (!(k.x_max > 0.0)) throw ConfigError("martingale covariates need x_max > 0");
                 },
                 [](const EmpiricalCovariates& k) {
                   if (!k.rows) throw ConfigError("empirical covariates need a row table");
                 },
             },
             kind_);
  if (!(declared_.lambda_min > 0.0) || declared_.lambda_max < declared_.lambda_min)
    throw ConfigError("declared covariance spectrum needs 0 < lambda_min <= lambda_max");
}

std::size_t CovariateSource::dim() const {
  return std::visit(Overloaded{
                        [](const IidUniformCovariates& k) { return k.m; },
                        [](const IidCustomCovariates& k) { return k.samplers.size(); },
                        [](const MartingaleCovariates& k) { return k.m; },
                        [](const EmpiricalCovariates& k) { return k.rows->cols(); },
                    },
                    kind_);
}

double CovariateSource::bound() const {
  return std::visit(Overloaded{
                        [](const IidUniformCovariates& k) { return k.x_max; },
                        [](const IidCustomCovariates& k) { return k.x_max; },
                        [](const MartingaleCovariates& k) { return k.x_max; },
                        [](const EmpiricalCovariates& k) {
                          double b = 0.0;
                          for (double v : k.rows->data()) b = std::max(b, std::abs(v));
                          return b;
                        },
                    },
                    kind_);
}

std::optional<std::size_t> CovariateSource::length() const {
  if (const auto* e = std::get_if<EmpiricalCovariates>(&kind_)) return e->rows->rows();
  return std::nullopt;
}

std::pair<double, double> CovariateSource::projection_range(std::span<const double> gamma) const {
  require_dim(gamma.size(), dim(), "covariate range");
  if (const auto* e = std::get_if<EmpiricalCovariates>(&kind_)) {
    if (e->rows->rows() == 0) return {0.0, 0.0};
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t r = 0; r < e->rows->rows(); ++r) {
      const double v = dot(gamma, e->rows->row(r));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return {lo, hi};
  }
  double l1 = 0.0;
  for (double g : gamma) l1 += std::abs(g);
  if (l1 == 0.0) return {0.0, 0.0};
  const double r = bound() * l1;
  return {-r, r};
}

CovariateStream CovariateSource::open(std::uint64_t episode_seed) const { return CovariateStream(*this, episode_seed); }

CovariateStream::CovariateStream(const CovariateSource& source, std::uint64_t episode_seed)
    : source_(&source), dim_(source.dim()), rng_(make_rng(episode_seed, Stream::kCovariates)) {
  if (const auto* e = std::get_if<EmpiricalCovariates>(&source.kind())) {
    order_.resize(e->rows->rows());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (e->permute) {
      Rng perm = make_rng(episode_seed, Stream::kPermutation);
      std::shuffle(order_.begin(), order_.end(), perm);
    }
  }
  if (std::holds_alternative<MartingaleCovariates>(source.kind())) previous_.assign(dim_, 0.0);
}

bool CovariateStream::next(std::span<double> out) {
  require_dim(out.size(), dim_, "covariate draw");
  return std::visit(Overloaded{
                        [&](const IidUniformCovariates& k) {
                          std::uniform_real_distribution<double> u(-k.x_max, k.x_max);
                          for (double& v : out) v = u(rng_);
                          return true;
                        },
                        [&](const IidCustomCovariates& k) {
                          for (std::size_t i = 0; i < dim_; ++i) out[i] = k.samplers[i](rng_);
                          return true;
                        },
                        [&](const MartingaleCovariates& k) {
                          std::uniform_real_distribution<double> u(-1.0, 1.0);
                          for (std::size_t i = 0; i < dim_; ++i) {
                            const double scale = 0.5 * (1.0 + std::abs(previous_[i]) / k.x_max);
                            out[i] = k.x_max * scale * u(rng_);
                            previous_[i] = out[i];
                          }
                          return true;
                        },
                        [&](const EmpiricalCovariates& k) {
                          if (cursor_ >= order_.size()) return false;
                          const auto row = k.rows->row(order_[cursor_++]);
                          std::copy(row.begin(), row.end(), out.begin());
                          return true;
                        },
                    },
                    source_->kind());
}

void ShockSource::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("shock sigma must be finite and >= 0");
}

ShockStream::ShockStream(const ShockSource& source, std::uint64_t episode_seed)
    : source_(source),
      rng_(make_rng(episode_seed, Stream::kShocks)),
      normal_(0.0, source.sigma > 0.0 ? source.sigma : 1.0),
      uniform_(-std::sqrt(3.0) * source.sigma, std::sqrt(3.0) * source.sigma) {}

double ShockStream::next() {
  if (source_.sigma == 0.0) return 0.0;
  switch (source_.kind) {
    case ShockKind::kGaussian:
      return normal_(rng_);
    case ShockKind::kUniform:
      return uniform_(rng_);
    case ShockKind::kZero:
      break;
  }
  return 0.0;
}

bool incumbent_separated(double a_prime, double p0, const ParamSpace& space, double delta0) {
  // Relative slack so boundary cases such as 0.6 / 0.4 - 1 = 0.5 are accepted.
  const double need = delta0 - 1e-12 * std::max(1.0, std::abs(delta0));
  return a_prime / (-space.b_max) - p0 >= need || p0 - a_prime / (-space.b_min) >= need;
}

void MarketConfig::validate() const {
  bounds.validate();
  space.validate();
  shocks.validate();
  require_dim(covariates.dim(), m(), "market");
  if (!std::isfinite(a_prime) || !std::isfinite(p0)) throw ConfigError("a' and p0 must be finite");
  if (!(true_theta.beta < 0.0)) throw ConfigError("true price coefficient must be negative");
  if (!space.contains(true_theta, 1e-12)) throw ConfigError("true parameter lies outside the parameter space");
  if (delta0) {
    if (!(*delta0 > 0.0)) throw ConfigError("delta0 must be > 0");
    if (!incumbent_separated(a_prime, p0, space, *delta0))
      throw ConfigError("incumbent price is not separated by delta0 from the candidate optima");
  }
  const auto [lo, hi] = covariates.projection_range(true_theta.gamma);
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    // Unbounded custom covariates with informative gamma: optimum cannot be
    // certified interior.
    throw ConfigError("cannot certify an interior optimum for unbounded covariates");
  }
  for (double gx : {lo, hi}) {
    const double p = (a_prime + gx) / (-2.0 * true_theta.beta) + p0 / 2.0;
    if (!(p > bounds.lower && p < bounds.upper))
      throw ConfigError("true optimal price " + std::to_string(p) + " is not interior to the price bounds");
  }
}

double realize_demand(double a_prime, double p0, const Theta& theta, double price, std::span<const double> x,
                      double shock) {
  require_dim(x.size(), theta.dim(), "demand");
  return a_prime + theta.beta * (price - p0) + dot(theta.gamma, x) + shock;
}

double realize_demand(const MarketConfig& cfg, double price, std::span<const double> x, double shock) {
  return realize_demand(cfg.a_prime, cfg.p0, cfg.true_theta, price, x, shock);
}

double expected_revenue(double a_prime, double p0, const Theta& theta, double price, std::span<const double> x) {
  return price * realize_demand(a_prime, p0, theta, price, x, 0.0);
}

double unconstrained_optimal_price(const Theta& theta, double a_prime, double p0, std::span<const double> x) {
  require_dim(x.size(), theta.dim(), "optimal price");
  if (!(theta.beta < 0.0)) throw InvalidParameter("optimal price needs a negative price coefficient");
  return (a_prime + dot(theta.gamma, x)) / (-2.0 * theta.beta) + p0 / 2.0;
}

double optimal_price(const Theta& theta, double a_prime, double p0, std::span<const double> x,
                     const PriceBounds& bounds) {
  return bounds.clamp(unconstrained_optimal_price(theta, a_prime, p0, x));
}

}  // namespace covprice
