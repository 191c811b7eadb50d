// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include "gist/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gist/errors.hpp"
#include "gist/kernels.hpp"

namespace gist::linalg {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 1.0;
  }
  return m;
}

std::vector<double> Matrix::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    out[i] = (*this)(i, j);
  }
  return out;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      t(j, i) = (*this)(i, j);
    }
  }
  return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ArgumentError("matrix product: inner dimensions differ");
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.row(k);
      double* crow = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) {
        crow[j] += aik * brow[j];
      }
    }
  }
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ArgumentError("matrix difference: shapes differ");
  }
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) {
    c.data()[i] = a.data()[i] - b.data()[i];
  }
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ArgumentError("matrix sum: shapes differ");
  }
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) {
    c.data()[i] = a.data()[i] + b.data()[i];
  }
  return c;
}

std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
  if (x.size() != m.cols()) {
    throw ArgumentError("matvec: vector length does not match matrix columns");
  }
  std::vector<double> y(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    y[i] = kernels::dot_dd(m.row(i), x.data(), m.cols());
  }
  return y;
}

double frobenius_norm(const Matrix& m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows() * m.cols(); ++i) {
    acc += m.data()[i] * m.data()[i];
  }
  return std::sqrt(acc);
}

double asymmetry(const Matrix& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      worst = std::max(worst, std::abs(m(i, j) - m(j, i)));
    }
  }
  return worst;
}

Matrix symmetrize(const Matrix& m) {
  Matrix s(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      s(i, j) = 0.5 * (m(i, j) + m(j, i));
    }
  }
  return s;
}

Matrix SymmetricEigen::top_vectors(std::size_t r) const {
  if (r > values.size()) {
    throw ArgumentError("top_vectors: rank exceeds dimension");
  }
  Matrix out(vectors.rows(), r);
  for (std::size_t i = 0; i < vectors.rows(); ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      out(i, j) = vectors(i, j);
    }
  }
  return out;
}

std::vector<double> SymmetricEigen::apply_pinv(std::span<const double> x, double rel_cutoff) const {
  const std::size_t d = vectors.rows();
  if (x.size() != d) {
    throw ArgumentError("apply_pinv: vector length mismatch");
  }
  double max_abs = 0.0;
  for (double v : values) max_abs = std::max(max_abs, std::abs(v));
  const double cutoff = rel_cutoff * max_abs;
  std::vector<double> out(d, 0.0);
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (std::abs(values[j]) <= cutoff) continue;
    double coeff = 0.0;
    for (std::size_t i = 0; i < d; ++i) coeff += vectors(i, j) * x[i];
    coeff /= values[j];
    for (std::size_t i = 0; i < d; ++i) out[i] += coeff * vectors(i, j);
  }
  return out;
}

std::vector<double> SymmetricEigen::apply_pinv_sqrt(std::span<const double> x,
                                                    double rel_cutoff) const {
  const std::size_t d = vectors.rows();
  if (x.size() != d) {
    throw ArgumentError("apply_pinv_sqrt: vector length mismatch");
  }
  double max_abs = 0.0;
  for (double v : values) max_abs = std::max(max_abs, std::abs(v));
  const double cutoff = rel_cutoff * max_abs;
  std::vector<double> out(d, 0.0);
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (values[j] <= cutoff) continue;  // negative or tiny: outside the support
    double coeff = 0.0;
    for (std::size_t i = 0; i < d; ++i) coeff += vectors(i, j) * x[i];
    coeff /= std::sqrt(values[j]);
    for (std::size_t i = 0; i < d; ++i) out[i] += coeff * vectors(i, j);
  }
  return out;
}

namespace {

double off_diagonal_norm(const Matrix& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (i != j) acc += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(acc);
}

}  // namespace

SymmetricEigen eigh(const Matrix& m, double off_tol, int max_sweeps) {
  if (m.rows() != m.cols()) {
    throw ArgumentError("eigh: matrix not square");
  }
  const std::size_t n = m.rows();
  const double scale = frobenius_norm(m);
  if (scale > 0.0 && asymmetry(m) > 1e-9 * scale) {
    throw ArgumentError("eigh: matrix not symmetric");
  }

  Matrix a = symmetrize(m);
  Matrix v = Matrix::identity(n);
  if (n <= 1 || scale == 0.0) {
    SymmetricEigen out{std::vector<double>(n), std::move(v)};
    for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i);
    return out;
  }

  const double target = off_tol * scale;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_diagonal_norm(a) <= target) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // classic two-sided Jacobi rotation zeroing a(p,q)
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                      : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
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
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return diag[x] > diag[y]; });

  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = diag[order[j]];
    for (std::size_t i = 0; i < n; ++i) {
      out.vectors(i, j) = v(i, order[j]);
    }
  }
  return out;
}

double spectral_norm_sym(const Matrix& m) {
  SymmetricEigen e = eigh(m);
  double worst = 0.0;
  for (double v : e.values) worst = std::max(worst, std::abs(v));
  return worst;
}

}  // namespace gist::linalg
