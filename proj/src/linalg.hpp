// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

// Small dense linear algebra for (m+1)x(m+1) Gram matrices and
// tall least-squares designs. Sizes here are tiny (m <= a few dozen), so
// plain row-major storage and textbook algorithms are enough.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace covprice {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  // this += scale * v v^T
  void add_outer(std::span<const double> v, double scale = 1.0);
  double trace() const;
  bool is_symmetric(double tol = 0.0) const;

  Matrix& operator+=(const Matrix& other);
  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

std::vector<double> multiply(const Matrix& a, std::span<const double> x);

// Lower-triangular Cholesky factor of a symmetric positive definite matrix;
// nullopt when a non-positive pivot shows up.
std::optional<Matrix> cholesky(const Matrix& spd);

// Solves (L L^T) x = b given the Cholesky factor L.
std::vector<double> cholesky_solve(const Matrix& lower, std::span<const double> b);

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(Matrix a);

double min_eigenvalue(const Matrix& symmetric);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

// Householder QR least squares for a tall design (n x k, n >= k).
struct QrSolution {
  std::vector<double> coef;
  // Diagonal of (X^T X)^{-1}, for coefficient standard errors.
  std::vector<double> inverse_gram_diag;
  double residual_sum_squares = 0.0;
  // Columns whose pivot collapsed relative to the largest |R_jj|; empty when
  // the design has full column rank.
  std::vector<std::size_t> dependent_columns;
};

QrSolution qr_least_squares(Matrix design, std::span<const double> y, double rank_tol = 1e-10);

}  // namespace covprice
