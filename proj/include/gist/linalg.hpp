// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Small dense f64 linear algebra shared by the spectral module and the toy
// oracles. Everything here targets matrices up to a few thousand rows; the
// production selection path never materializes anything larger than the
// target-pool Gram.

namespace gist::linalg {

/// Dense row-major f64 matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  /// Copy of column j.
  std::vector<double> column(std::size_t j) const;

  Matrix transposed() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);

std::vector<double> matvec(const Matrix& m, std::span<const double> x);

double frobenius_norm(const Matrix& m);

/// Largest absolute entry of (m - m^T); 0 for symmetric input.
double asymmetry(const Matrix& m);

/// (m + m^T) / 2.
Matrix symmetrize(const Matrix& m);

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // column j pairs with values[j]

  /// d x r matrix whose columns are the leading r eigenvectors.
  Matrix top_vectors(std::size_t r) const;

  /// sum_{|lambda_i| > rel_cutoff * max|lambda|} (u_i^T x / lambda_i) u_i
  std::vector<double> apply_pinv(std::span<const double> x, double rel_cutoff) const;

  /// Same support, weights 1/sqrt(lambda_i); negative eigenvalues are treated
  /// as outside the support (only meaningful for PSD matrices).
  std::vector<double> apply_pinv_sqrt(std::span<const double> x, double rel_cutoff) const;
};

/// Cyclic Jacobi sweeps until the off-diagonal Frobenius norm drops below
/// off_tol * ||m||_F. Input must be symmetric within asym_tol * ||m||_F.
SymmetricEigen eigh(const Matrix& m, double off_tol = 1e-12, int max_sweeps = 100);

/// max |eigenvalue| of a symmetric matrix.
double spectral_norm_sym(const Matrix& m);

}  // namespace gist::linalg
