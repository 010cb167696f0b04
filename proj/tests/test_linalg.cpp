// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "linalg.hpp"
#include "oracles.hpp"

using namespace covprice;

namespace {

Matrix random_psd(std::mt19937_64& rng, std::size_t n, std::size_t rank) {
  std::normal_distribution<double> g;
  Matrix a(n, n);
  std::vector<double> v(n);
  for (std::size_t k = 0; k < rank; ++k) {
    for (auto& e : v) e = g(rng);
    a.add_outer(v);
  }
  return a;
}

// Q diag(d) Q^T with Q from Householder reflections of random vectors.
Matrix rotated_diagonal(std::mt19937_64& rng, const std::vector<double>& d) {
  const std::size_t n = d.size();
  Matrix a = Matrix::diagonal(d);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 3; ++rep) {
    std::vector<double> v(n);
    for (auto& e : v) e = g(rng);
    const double nn = dot(v, v);
    Matrix h = Matrix::identity(n);
    h.add_outer(v, -2.0 / nn);
    Matrix tmp(n, n), out(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) tmp(i, j) += h(i, k) * a(k, j);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) out(i, j) += tmp(i, k) * h(k, j);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) out(i, j) = out(j, i) = 0.5 * (out(i, j) + out(j, i));
    a = out;
  }
  return a;
}

}  // namespace

TEST_SUITE("linalg") {
  TEST_CASE("minimum eigenvalue of simple matrices") {
    CHECK(min_eigenvalue(Matrix::identity(3)) == doctest::Approx(1.0));
    const std::vector<double> d{3.0, 7.0};
    CHECK(min_eigenvalue(Matrix::diagonal(d)) == doctest::Approx(3.0));
  }

  TEST_CASE("2x2 eigenvalues match the characteristic polynomial") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 500; ++i) {
      const Matrix a = random_psd(rng, 2, 1 + i % 3);
      const auto [lo, hi] = oracle::eig2(a(0, 0), a(0, 1), a(1, 1));
      const auto ev = symmetric_eigenvalues(a);
      REQUIRE(ev.size() == 2);
      CHECK(std::fabs(ev[0] - lo) <= 1e-9 * std::max(1.0, hi));
      CHECK(std::fabs(ev[1] - hi) <= 1e-9 * std::max(1.0, hi));
    }
  }

  TEST_CASE("Jacobi recovers a known spectrum") {
    std::mt19937_64 rng(5);
    const std::vector<double> d{0.001, 0.5, 2.0, 3.0, 10.0, 250.0};
    const auto ev = symmetric_eigenvalues(rotated_diagonal(rng, d));
    REQUIRE(ev.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(ev[i] == doctest::Approx(d[i]).epsilon(1e-9));
  }

  TEST_CASE("minimum eigenvalue is superadditive on PSD matrices") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
      const std::size_t n = 2 + i % 5;
      const Matrix a = random_psd(rng, n, n + 1), b = random_psd(rng, n, n);
      const double scale = std::max(a.trace(), b.trace());
      CHECK(min_eigenvalue(a + b) >= min_eigenvalue(a) + min_eigenvalue(b) - 1e-10 * scale);
    }
  }

  TEST_CASE("Cholesky solve") {
    std::mt19937_64 rng(8);
    const Matrix a = random_psd(rng, 4, 8);
    const auto l = cholesky(a);
    REQUIRE(l.has_value());
    const std::vector<double> b{1.0, -2.0, 0.5, 3.0};
    const auto x = cholesky_solve(*l, b);
    const auto ax = multiply(a, x);
    for (std::size_t i = 0; i < 4; ++i) CHECK(ax[i] == doctest::Approx(b[i]).epsilon(1e-10));

    Matrix singular(2, 2);
    const std::vector<double> v{1.0, 2.0};
    singular.add_outer(v);
    singular(0, 0) -= 1e-3;
    CHECK_FALSE(cholesky(singular).has_value());
  }

  TEST_CASE("QR least squares agrees with normal equations") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g;
    const std::size_t n = 300, k = 5;
    Matrix x(n, k);
    oracle::Rows rows(n, std::vector<double>(k));
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < k; ++c) rows[r][c] = x(r, c) = g(rng);
      y[r] = 1.0 + 2.0 * x(r, 1) - x(r, 3) + 0.1 * g(rng);
    }
    const auto qr = qr_least_squares(x, y);
    const auto ref = oracle::batch_ols(rows, y);
    CHECK(qr.dependent_columns.empty());
    for (std::size_t c = 0; c < k; ++c) CHECK(oracle::rel_err(qr.coef[c], ref[c]) < 1e-10);
    double rss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double fit = 0.0;
      for (std::size_t c = 0; c < k; ++c) fit += x(r, c) * ref[c];
      rss += (y[r] - fit) * (y[r] - fit);
    }
    CHECK(qr.residual_sum_squares == doctest::Approx(rss).epsilon(1e-9));
  }

  TEST_CASE("QR flags a duplicated column") {
    Matrix x(20, 3);
    for (std::size_t r = 0; r < 20; ++r) {
      x(r, 0) = 1.0;
      x(r, 1) = static_cast<double>(r % 7);
      x(r, 2) = x(r, 1);
    }
    std::vector<double> y(20, 1.0);
    const auto qr = qr_least_squares(x, y);
    REQUIRE(qr.dependent_columns.size() == 1);
    CHECK(qr.dependent_columns[0] == 2);
  }

  TEST_CASE("add_outer keeps symmetry") {
    Matrix a(3, 3);
    const std::vector<double> v{0.1, -3.0, 7.5};
    a.add_outer(v, 2.0);
    CHECK(a.is_symmetric());
    CHECK(a(1, 2) == doctest::Approx(2.0 * -3.0 * 7.5));
    CHECK(a.trace() == doctest::Approx(2.0 * dot(v, v)));
  }
}
