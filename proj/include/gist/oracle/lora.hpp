// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gist/linalg.hpp"

// Bilinear adapter W = W0 + B A over a quadratic loss in vec(W). Even with a
// plain quadratic in W, the adapter parameterization induces off-diagonal
// curvature between entries of one row of A; the closed-form entry below is
// the object the finite-difference oracle checks.
//
// vec() is column-major throughout: vec(W)[i + d_out * j] = W(i, j), so the
// direction of a unit change in A(k, j) is e_j (x) B_{:k}.

namespace gist::oracle {

struct LoraModel {
  linalg::Matrix w0;  // d_out x d_in
  linalg::Matrix b;   // d_out x rank
  linalg::Matrix a;   // rank x d_in
  linalg::Matrix h_w;  // (d_out * d_in)^2, symmetric PSD
  std::vector<double> linear;  // q in L(v) = 1/2 v^T H_W v + q^T v

  std::size_t d_out() const { return w0.rows(); }
  std::size_t d_in() const { return w0.cols(); }
  std::size_t rank() const { return b.cols(); }
  std::size_t w_dim() const { return d_out() * d_in(); }
  std::size_t adapter_dim() const { return rank() * d_in() + d_out() * rank(); }

  /// Validates shapes and that h_w is symmetric PSD within 1e-10.
  void validate() const;

  /// vec(W0 + B A), column-major.
  std::vector<double> vec_w() const;
  std::vector<double> vec_w_with_a(const linalg::Matrix& a_alt) const;

  /// L = 1/2 v^T H_W v + q^T v at the current adapter (or a replacement A).
  double loss() const;
  double loss_with_a(const linalg::Matrix& a_alt) const;

  /// Gradient in adapter space, layout [vec_cm(A); vec_cm(B)].
  std::vector<double> adapter_gradient() const;

  /// Random instance; `coupled` draws a dense PSD H_W, otherwise a positive
  /// diagonal one.
  static LoraModel random(std::uint64_t seed, std::size_t d_out, std::size_t d_in,
                          std::size_t rank, bool coupled);
};

/// (e_{j1} (x) B_{:k})^T H_W (e_{j2} (x) B_{:k}), the curvature between
/// A(k, j1) and A(k, j2) of the composed loss. Indices are 0-based.
double lora_hessian_entry(const LoraModel& model, std::size_t k, std::size_t j1, std::size_t j2);

}  // namespace gist::oracle
