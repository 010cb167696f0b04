// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "linalg.hpp"
#include "market.hpp"

namespace covprice {

/// Online least squares for theta = (beta, gamma) with a known intercept a'
/// at the incumbent price p0. Regressor rows are u = (p - p0, x) and the
/// response is d - a', so the estimate solves
///
///     (sum u u^T) theta_hat = sum u (d - a').
///
/// The Gram matrix and moment vector are accumulated exactly; each solve
/// refactorizes the (m+1)x(m+1) Gram matrix.
class LeastSquaresEstimator {
 public:
  explicit LeastSquaresEstimator(std::size_t m);

  /// Throws DataError on non-finite input, ConfigError on a dimension mismatch.
  void update(double price, std::span<const double> x, double demand, double a_prime, double p0);

  /// Raw estimate, or nullopt while the Gram matrix is not yet identifiable
  /// (lambda_min < 1e-10 * trace, or fewer than m+1 samples).
  std::optional<Theta> solve() const;

  /// Minimum eigenvalue of the Gram matrix (cyclic Jacobi).
  double min_eigenvalue() const;

  bool identifiable() const;

  std::size_t dim() const noexcept { return m_; }
  std::uint64_t count() const noexcept { return count_; }
  const Matrix& gram() const noexcept { return gram_; }
  std::span<const double> moment() const noexcept { return moment_; }

  static constexpr double kIdentifiabilityTol = 1e-10;

 private:
  std::size_t m_;
  std::uint64_t count_ = 0;
  Matrix gram_;
  std::vector<double> moment_;
  std::vector<double> u_;
  mutable std::optional<std::optional<Theta>> solve_cache_;
  mutable std::optional<double> lambda_min_cache_;
};

/// Euclidean projection onto Theta. Theta is the product of an interval and a
/// ball, so clamping beta and radially shrinking gamma is the exact minimizer.
Theta project(const Theta& theta_hat, const ParamSpace& space);

struct TheoryInputs {
  ParamSpace space;
  double a_prime = 0.0;
  double p0 = 1.0;
  double delta0 = 0.0;
  std::size_t m = 0;
  double x_max = 1.0;
  double sigma_eps = 0.0;
  CovarianceSpectrum covariance;
};

struct TheoryConstants {
  double k0 = 0.0;
  double lambda0 = 0.0;
  double r = 0.0;
  double c = 0.0;
};

/// Regret-bound constants of the greedy policy:
///   K0      = (a'^2 + (r_max^2 + b_min^2) lambda_max) / (4 b_max^4)
///   lambda0 = min(delta0^2 / 2, delta0^2 b_max^2 / r_max^2, lambda_min / 2)
///   R       = m x_max^2 + p0^2 / 2 + (a'^2 + m r_max^2 x_max^2) / b_max^2
///   C       = 4 |b_min| K0 sigma^2 / lambda0^2 * (p0^2/2 + (a'^2 + m r_max^2 x_max^2) / b_max^2 + m)
/// With r_max = 0 the middle lambda0 term is +infinity and drops out.
TheoryConstants theory_constants(const TheoryInputs& in);

}  // namespace covprice
