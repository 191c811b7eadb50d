// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "gist/gradstore.hpp"
#include "gist/linalg.hpp"

// Independent reference computations used only by tests. The SVD here is a
// one-sided Jacobi on the matrix itself, deliberately avoiding the Gram+eigh
// route the production code takes.

namespace gist::testing {

struct DenseSvd {
  std::vector<double> singular_values;  // descending
  linalg::Matrix right_vectors;         // d x n, column j pairs with sigma_j
};

/// One-sided Jacobi SVD of an n x d matrix (rows = examples). Columns of
/// right_vectors with sigma ~ 0 are numerically meaningless.
DenseSvd dense_svd(const linalg::Matrix& g);

/// Central-difference second derivative of f along coordinates (i, j).
double fd_second_derivative(const std::function<double(const std::vector<double>&)>& f,
                            const std::vector<double>& x0, std::size_t i, std::size_t j, double h);

/// Spearman rank correlation (average ranks on ties).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

/// Uniform random gradient matrix with rows in [-1, 1], ids "ex_<i>".
gist::gradstore::GradientMatrix random_gradient_matrix(std::uint64_t seed, std::size_t rows,
                                                       std::size_t dim,
                                                       const std::string& tag = "test");

/// Random n x n symmetric PSD matrix with eigenvalues drawn from [lo, hi].
linalg::Matrix random_psd(std::uint64_t seed, std::size_t n, double lo, double hi);

/// Random matrix with standard normal entries.
linalg::Matrix random_matrix(std::uint64_t seed, std::size_t rows, std::size_t cols);

/// Orthonormal columns via Gram-Schmidt on random vectors.
linalg::Matrix random_orthonormal(std::uint64_t seed, std::size_t rows, std::size_t cols);

}  // namespace gist::testing
