// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

// Ground-truth demand environment: linear demand around a known incumbent
// price, covariate and shock sources, and revenue / optimal-price formulas.
//
//   D = a' + beta (p - p0) + gamma . x + eps
//   r(p, x) = p [a' + beta (p - p0) + gamma . x]
//   p*(x) = (a' + gamma . x) / (-2 beta) + p0 / 2

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "linalg.hpp"
#include "rng.hpp"

namespace covprice {

// Demand parameters (beta, gamma). gamma may be empty (no covariates).
struct Theta {
  double beta = -1.0;
  std::vector<double> gamma;

  std::size_t dim() const noexcept { return gamma.size(); }
  // (beta, gamma...) as one vector of length m + 1.
  std::vector<double> flatten() const;
  static Theta unflatten(std::span<const double> v);

  friend bool operator==(const Theta&, const Theta&) = default;
};

double distance_sq(const Theta& a, const Theta& b);

// Theta = [b_min, b_max] x { gamma : |gamma|_2 <= r_max }.
struct ParamSpace {
  double b_min = -1.0;
  double b_max = -0.5;
  double r_max = 1.0;

  // Throws ConfigError unless b_min <= b_max < 0 and r_max >= 0.
  void validate() const;
  bool contains(const Theta& theta, double tol = 0.0) const;
};

struct PriceBounds {
  double lower = 0.0;
  double upper = 1.0;

  void validate() const;
  double clamp(double p) const noexcept;
  bool contains(double p) const noexcept { return p >= lower && p <= upper; }
};

// Declared extreme eigenvalues of the covariate covariance; only used by the
// theory-constant diagnostics.
struct CovarianceSpectrum {
  double lambda_min = 1.0;
  double lambda_max = 1.0;
};

struct IidUniformCovariates {
  std::size_t m = 0;
  double x_max = 1.0;
};

// Independent coordinates from user-supplied samplers. `x_max` is the support
// bound the samplers promise (infinity when unbounded).
struct IidCustomCovariates {
  std::vector<std::function<double(Rng&)>> samplers;
  double x_max = std::numeric_limits<double>::infinity();
};

// x_{t,i} = x_max * s_{t,i} * V,  V ~ U[-1, 1],  s_{t,i} = (1 + |x_{t-1,i}| / x_max) / 2.
// Conditional mean zero given the past, conditional variance in
// [x_max^2 / 12, x_max^2 / 3], and |x| <= x_max.
struct MartingaleCovariates {
  std::size_t m = 0;
  double x_max = 1.0;
};

// Replays recorded rows. Rows are permuted per episode unless `permute` is
// false, in which case they are served in file order.
struct EmpiricalCovariates {
  std::shared_ptr<const Matrix> rows;
  bool permute = true;
};

class CovariateStream;

class CovariateSource {
 public:
  using Kind = std::variant<IidUniformCovariates, IidCustomCovariates, MartingaleCovariates, EmpiricalCovariates>;

  CovariateSource() : kind_(IidUniformCovariates{}) {}
  explicit CovariateSource(Kind kind, std::optional<CovarianceSpectrum> declared = std::nullopt);

  static CovariateSource none() { return CovariateSource(IidUniformCovariates{0, 1.0}); }

  std::size_t dim() const;
  // Support bound on |x|_inf; infinity when unknown.
  double bound() const;
  // Number of rows for replay sources.
  std::optional<std::size_t> length() const;
  const Kind& kind() const noexcept { return kind_; }
  const CovarianceSpectrum& declared_covariance() const noexcept { return declared_; }

  // Range [min, max] of gamma . x over the support (or the recorded rows).
  std::pair<double, double> projection_range(std::span<const double> gamma) const;

  CovariateStream open(std::uint64_t episode_seed) const;

 private:
  Kind kind_;
  CovarianceSpectrum declared_;
};

// Per-episode mutable state of a covariate source.
class CovariateStream {
 public:
  CovariateStream(const CovariateSource& source, std::uint64_t episode_seed);

  // Writes the next vector into `out` (size must equal dim()); false once an
  // empirical source is exhausted.
  bool next(std::span<double> out);
  std::size_t dim() const noexcept { return dim_; }

 private:
  const CovariateSource* source_;
  std::size_t dim_;
  Rng rng_;
  std::vector<double> previous_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

enum class ShockKind { kGaussian, kZero, kUniform };

// Demand shocks. kUniform draws from U[-sqrt(3) sigma, sqrt(3) sigma], a
// bounded law with variance sigma^2.
struct ShockSource {
  ShockKind kind = ShockKind::kGaussian;
  double sigma = 0.0;

  void validate() const;
};

class ShockStream {
 public:
  ShockStream(const ShockSource& source, std::uint64_t episode_seed);
  double next();

 private:
  ShockSource source_;
  Rng rng_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

struct MarketConfig {
  double a_prime = 0.0;
  double p0 = 1.0;
  PriceBounds bounds;
  Theta true_theta;
  ParamSpace space;
  CovariateSource covariates = CovariateSource::none();
  ShockSource shocks;
  // Separation margin of the incumbent price; checked when present.
  std::optional<double> delta0;

  std::size_t m() const noexcept { return true_theta.dim(); }

  // Throws ConfigError on dimension mismatch, infeasible bounds, true theta
  // outside the parameter space, a non-interior true optimum at the covariate
  // extremes, or a violated incumbent-separation condition.
  void validate() const;
};

// True iff a'/(-b_max) - p0 >= delta0 or p0 - a'/(-b_min) >= delta0.
bool incumbent_separated(double a_prime, double p0, const ParamSpace& space, double delta0);

double realize_demand(double a_prime, double p0, const Theta& theta, double price, std::span<const double> x,
                      double shock);
double realize_demand(const MarketConfig& cfg, double price, std::span<const double> x, double shock);

double expected_revenue(double a_prime, double p0, const Theta& theta, double price, std::span<const double> x);

// Interior maximizer of r(., x); throws InvalidParameter when beta >= 0.
double unconstrained_optimal_price(const Theta& theta, double a_prime, double p0, std::span<const double> x);

// The closed form clamped into the price bounds.
double optimal_price(const Theta& theta, double a_prime, double p0, std::span<const double> x,
                     const PriceBounds& bounds);

}  // namespace covprice
