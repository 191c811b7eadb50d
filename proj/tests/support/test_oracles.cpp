// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include "support/test_oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gist::testing {

DenseSvd dense_svd(const linalg::Matrix& g) {
  const std::size_t n = g.rows();
  const std::size_t d = g.cols();
  // work on A = G^T (d x n); orthogonalizing its columns yields the right
  // singular vectors of G directly
  linalg::Matrix a = g.transposed();

  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          alpha += a(i, p) * a(i, p);
          beta += a(i, q) * a(i, q);
          gamma += a(i, p) * a(i, q);
        }
        if (std::abs(gamma) <= 1e-14 * std::sqrt(alpha * beta) || gamma == 0.0) {
          continue;
        }
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0) ? 1.0 / (zeta + std::sqrt(1.0 + zeta * zeta))
                                       : 1.0 / (zeta - std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < d; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) acc += a(i, j) * a(i, j);
    norms[j] = std::sqrt(acc);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  DenseSvd out;
  out.singular_values.resize(n);
  out.right_vectors = linalg::Matrix(d, n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.singular_values[j] = norms[src];
    if (norms[src] > 0.0) {
      for (std::size_t i = 0; i < d; ++i) {
        out.right_vectors(i, j) = a(i, src) / norms[src];
      }
    }
  }
  return out;
}

double fd_second_derivative(const std::function<double(const std::vector<double>&)>& f,
                            const std::vector<double>& x0, std::size_t i, std::size_t j, double h) {
  std::vector<double> x = x0;
  if (i == j) {
    const double f0 = f(x);
    x[i] = x0[i] + h;
    const double fp = f(x);
    x[i] = x0[i] - h;
    const double fm = f(x);
    return (fp - 2.0 * f0 + fm) / (h * h);
  }
  x[i] = x0[i] + h;
  x[j] = x0[j] + h;
  const double fpp = f(x);
  x[j] = x0[j] - h;
  const double fpm = f(x);
  x[i] = x0[i] - h;
  x[j] = x0[j] + h;
  const double fmp = f(x);
  x[j] = x0[j] - h;
  const double fmm = f(x);
  return (fpp - fpm - fmp + fmm) / (4.0 * h * h);
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const std::size_t n = a.size();
  double mean = (static_cast<double>(n) + 1.0) / 2.0;
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (ra[i] - mean) * (rb[i] - mean);
    da += (ra[i] - mean) * (ra[i] - mean);
    db += (rb[i] - mean) * (rb[i] - mean);
  }
  return num / std::sqrt(da * db);
}

gist::gradstore::GradientMatrix random_gradient_matrix(std::uint64_t seed, std::size_t rows,
                                                       std::size_t dim, const std::string& tag) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> unif(-1.0F, 1.0F);
  std::vector<float> values(rows * dim);
  for (auto& v : values) v = unif(rng);
  std::vector<std::string> ids(rows);
  for (std::size_t i = 0; i < rows; ++i) ids[i] = "ex_" + std::to_string(i);
  return gist::gradstore::GradientMatrix(rows, dim, std::move(values), std::move(ids), tag);
}

linalg::Matrix random_matrix(std::uint64_t seed, std::size_t rows, std::size_t cols) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  linalg::Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) m.data()[i] = normal(rng);
  return m;
}

linalg::Matrix random_orthonormal(std::uint64_t seed, std::size_t rows, std::size_t cols) {
  linalg::Matrix m = random_matrix(seed, rows, cols);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t prev = 0; prev < j; ++prev) {
      double dot = 0.0;
      for (std::size_t i = 0; i < rows; ++i) dot += m(i, j) * m(i, prev);
      for (std::size_t i = 0; i < rows; ++i) m(i, j) -= dot * m(i, prev);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < rows; ++i) norm += m(i, j) * m(i, j);
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < rows; ++i) m(i, j) /= norm;
  }
  return m;
}

linalg::Matrix random_psd(std::uint64_t seed, std::size_t n, double lo, double hi) {
  const linalg::Matrix q = random_orthonormal(seed, n, n);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unif(lo, hi);
  std::vector<double> lambda(n);
  for (auto& l : lambda) l = unif(rng);
  linalg::Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += q(i, k) * lambda[k] * q(j, k);
      m(i, j) = acc;
      m(j, i) = acc;
    }
  }
  return m;
}

}  // namespace gist::testing
