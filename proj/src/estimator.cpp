// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

#include "estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"

namespace covprice {

LeastSquaresEstimator::LeastSquaresEstimator(std::size_t m)
    : m_(m), gram_(m + 1, m + 1), moment_(m + 1, 0.0), u_(m + 1, 0.0) {}

void LeastSquaresEstimator::update(double price, std::span<const double> x, double demand, double a_prime,
                                   double p0) {
  if (x.size() != m_)
    throw ConfigError("estimator expects " + std::to_string(m_) + " covariates, got " + std::to_string(x.size()));
  if (!std::isfinite(price) || !std::isfinite(demand) || !std::isfinite(a_prime) || !std::isfinite(p0))
    throw DataError("non-finite observation");
  for (double v : x)
    if (!std::isfinite(v)) throw DataError("non-finite covariate");

  u_[0] = price - p0;
  std::copy(x.begin(), x.end(), u_.begin() + 1);
  gram_.add_outer(u_);
  const double y = demand - a_prime;
  for (std::size_t i = 0; i <= m_; ++i) moment_[i] += u_[i] * y;
  ++count_;
  solve_cache_.reset();
  lambda_min_cache_.reset();
}

double LeastSquaresEstimator::min_eigenvalue() const {
  if (!lambda_min_cache_) lambda_min_cache_ = covprice::min_eigenvalue(gram_);
  return *lambda_min_cache_;
}

bool LeastSquaresEstimator::identifiable() const {
  if (count_ < m_ + 1) return false;
  const double tr = gram_.trace();
  return tr > 0.0 && min_eigenvalue() >= kIdentifiabilityTol * tr;
}

std::optional<Theta> LeastSquaresEstimator::solve() const {
  if (solve_cache_) return *solve_cache_;
  std::optional<Theta> result;
  if (count_ >= m_ + 1) {
    if (auto l = cholesky(gram_)) {
      // 1 / trace(G^{-1}) is a lower bound on lambda_min(G) and costs one
      // triangular inverse; fall back to the eigen-solve only when the bound
      // is inconclusive.
      const std::size_t n = m_ + 1;
      double inv_trace = 0.0;
      std::vector<double> col(n);
      for (std::size_t c = 0; c < n; ++c) {
        std::fill(col.begin(), col.end(), 0.0);
        col[c] = 1.0 / (*l)(c, c);
        inv_trace += col[c] * col[c];
        for (std::size_t i = c + 1; i < n; ++i) {
          double s = 0.0;
          for (std::size_t k = c; k < i; ++k) s -= (*l)(i, k) * col[k];
          col[i] = s / (*l)(i, i);
          inv_trace += col[i] * col[i];
        }
      }
      const double lower_bound = 1.0 / inv_trace;
      if (lower_bound >= kIdentifiabilityTol * gram_.trace() || identifiable())
        result = Theta::unflatten(cholesky_solve(*l, moment_));
    }
  }
  solve_cache_ = result;
  return result;
}

Theta project(const Theta& theta_hat, const ParamSpace& space) {
  Theta out;
  out.beta = std::clamp(theta_hat.beta, space.b_min, space.b_max);
  out.gamma = theta_hat.gamma;
  const double r = norm2(out.gamma);
  if (r > space.r_max) {
    if (space.r_max == 0.0) {
      std::fill(out.gamma.begin(), out.gamma.end(), 0.0);
    } else {
      // Rounding can leave the scaled norm an ulp above r_max; shrink the
      // factor until the result lies in the ball so projection is idempotent.
      double s = space.r_max / r;
      std::vector<double> scaled(out.gamma.size());
      for (;;) {
        for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = out.gamma[i] * s;
        if (norm2(scaled) <= space.r_max) break;
        s = std::nextafter(s, 0.0);
      }
      out.gamma = std::move(scaled);
    }
  }
  return out;
}

TheoryConstants theory_constants(const TheoryInputs& in) {
  in.space.validate();
  if (!(in.delta0 > 0.0)) throw ConfigError("theory constants need delta0 > 0");
  const double b_min = in.space.b_min;
  const double b_max = in.space.b_max;
  const double r_max = in.space.r_max;
  const double m = static_cast<double>(in.m);
  const double a2 = in.a_prime * in.a_prime;
  const double x2 = in.x_max * in.x_max;
  const double d2 = in.delta0 * in.delta0;

  TheoryConstants k;
  k.k0 = (a2 + (r_max * r_max + b_min * b_min) * in.covariance.lambda_max) / (4.0 * std::pow(b_max, 4));
  double lambda0 = std::min(d2 / 2.0, in.covariance.lambda_min / 2.0);
  if (r_max > 0.0) lambda0 = std::min(lambda0, d2 * b_max * b_max / (r_max * r_max));
  k.lambda0 = lambda0;
  const double price_term = in.p0 * in.p0 / 2.0 + (a2 + m * r_max * r_max * x2) / (b_max * b_max);
  k.r = m * x2 + price_term;
  k.c = 4.0 * std::abs(b_min) * k.k0 * in.sigma_eps * in.sigma_eps / (lambda0 * lambda0) * (price_term + m);
  return k;
}

}  // namespace covprice
