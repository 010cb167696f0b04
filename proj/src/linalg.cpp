// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

#include "linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace covprice {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

void Matrix::add_outer(std::span<const double> v, double scale) {
  assert(rows_ == v.size() && cols_ == v.size());
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double vi = scale * v[i];
    double* r = data_.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) r[j] += vi * v[j];
  }
}

double Matrix::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
  return s;
}

bool Matrix::is_symmetric(double tol) const {
  if (rows_ != cols_) return false;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i + 1; j < cols_; ++j)
      if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
  return true;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw std::invalid_argument("matrix shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

std::vector<double> multiply(const Matrix& a, std::span<const double> x) {
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

std::optional<Matrix> cholesky(const Matrix& spd) {
  const std::size_t n = spd.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = spd(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return std::nullopt;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = spd(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

std::vector<double> cholesky_solve(const Matrix& lower, std::span<const double> b) {
  const std::size_t n = lower.rows();
  std::vector<double> y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) y[i] -= lower(i, k) * y[k];
    y[i] /= lower(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) y[i] -= lower(k, i) * y[k];
    y[i] /= lower(i, i);
  }
  return y;
}

std::vector<double> symmetric_eigenvalues(Matrix a) {
  const std::size_t n = a.rows();
  if (n != a.cols()) throw std::invalid_argument("eigenvalues of a non-square matrix");

  auto off_norm_sq = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return s;
  };
  double total = 0.0;
  for (double v : a.data()) total += v * v;

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_norm_sq() <= 1e-32 * total) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

double min_eigenvalue(const Matrix& symmetric) {
  if (symmetric.rows() == 1) return symmetric(0, 0);
  return symmetric_eigenvalues(symmetric).front();
}

QrSolution qr_least_squares(Matrix x, std::span<const double> y, double rank_tol) {
  const std::size_t n = x.rows();
  const std::size_t k = x.cols();
  if (n < k) throw std::invalid_argument("least squares needs at least as many rows as columns");
  if (y.size() != n) throw std::invalid_argument("response length does not match design rows");

  std::vector<double> col_norm(k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) col_norm[j] += x(i, j) * x(i, j);
  for (double& c : col_norm) c = std::sqrt(c);

  std::vector<double> qty(y.begin(), y.end());
  std::vector<double> v(n);
  QrSolution out;
  for (std::size_t j = 0; j < k; ++j) {
    double alpha = 0.0;
    for (std::size_t i = j; i < n; ++i) alpha += x(i, j) * x(i, j);
    alpha = std::sqrt(alpha);
    if (alpha <= rank_tol * std::max(col_norm[j], 1e-300)) {
      out.dependent_columns.push_back(j);
      continue;
    }
    if (x(j, j) > 0) alpha = -alpha;
    for (std::size_t i = j; i < n; ++i) v[i] = x(i, j);
    v[j] -= alpha;
    double vnorm_sq = 0.0;
    for (std::size_t i = j; i < n; ++i) vnorm_sq += v[i] * v[i];
    if (vnorm_sq == 0.0) continue;
    for (std::size_t c = j; c < k; ++c) {
      double s = 0.0;
      for (std::size_t i = j; i < n; ++i) s += v[i] * x(i, c);
      s = 2.0 * s / vnorm_sq;
      for (std::size_t i = j; i < n; ++i) x(i, c) -= s * v[i];
    }
    double s = 0.0;
    for (std::size_t i = j; i < n; ++i) s += v[i] * qty[i];
    s = 2.0 * s / vnorm_sq;
    for (std::size_t i = j; i < n; ++i) qty[i] -= s * v[i];
  }
  if (!out.dependent_columns.empty()) return out;

  // Back substitution R b = Q^T y, and R^{-1} for the inverse Gram diagonal.
  out.coef.assign(k, 0.0);
  for (std::size_t i = k; i-- > 0;) {
    double s = qty[i];
    for (std::size_t c = i + 1; c < k; ++c) s -= x(i, c) * out.coef[c];
    out.coef[i] = s / x(i, i);
  }
  Matrix rinv(k, k);
  for (std::size_t c = 0; c < k; ++c) {
    rinv(c, c) = 1.0 / x(c, c);
    for (std::size_t i = c; i-- > 0;) {
      double s = 0.0;
      for (std::size_t l = i + 1; l <= c; ++l) s += x(i, l) * rinv(l, c);
      rinv(i, c) = -s / x(i, i);
    }
  }
  out.inverse_gram_diag.assign(k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t c = i; c < k; ++c) out.inverse_gram_diag[i] += rinv(i, c) * rinv(i, c);
  for (std::size_t i = k; i < n; ++i) out.residual_sum_squares += qty[i] * qty[i];
  return out;
}

}  // namespace covprice
