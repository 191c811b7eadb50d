// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "gist/linalg.hpp"
#include "gist/oracle/nll.hpp"

// Influence utilities around the single-level objective
// g_val^T H^+ g_candidate, its magnitude/direction factorization and the
// subspace-stability report that ties the Fisher proxy to the exact Hessian.

namespace gist::oracle {

/// Pseudoinverse cutoff: |lambda| <= kPinvRelCutoff * max|lambda| is treated
/// as a null direction.
inline constexpr double kPinvRelCutoff = 1e-10;

/// g_val^T H^+ g_candidate.
double influence_score(std::span<const double> validation_gradient, const linalg::Matrix& hessian,
                       std::span<const double> candidate_gradient);
double influence_score(std::span<const double> validation_gradient,
                       const linalg::SymmetricEigen& hessian_eig,
                       std::span<const double> candidate_gradient);

struct UtilityDecomposition {
  double magnitude_val = 0.0;   // ||(H^+)^(1/2) g_val||
  double magnitude_cand = 0.0;  // ||(H^+)^(1/2) g_candidate||
  double cosine = 0.0;          // angle between the tilded vectors (0 if either vanishes)

  double product() const { return magnitude_val * magnitude_cand * cosine; }
};

/// Splits the influence score into magnitude and direction factors through
/// the half-preconditioned vectors; product() reproduces influence_score.
/// Meaningful for PSD hessians (negative eigenvalues fall out of the support).
UtilityDecomposition decompose_utility(std::span<const double> validation_gradient,
                                       std::span<const double> candidate_gradient,
                                       const linalg::Matrix& hessian_psd);

struct PredictionCheck {
  double predicted = 0.0;  // -lr * g_val^T H^+ g_candidate
  double actual = 0.0;     // exact validation-loss change after the step
};

/// Applies theta - lr * H^+ g_candidate with the exact validation Hessian of
/// `examples` and recomputes the exact validation loss.
PredictionCheck influence_prediction_check(const NllToyModel& model, std::span<const double> theta,
                                           std::span<const NllExample> examples,
                                           const NllExample& candidate, double lr);

struct Theorem3Report {
  std::size_t rank = 0;
  double sin_theta = 0.0;   // ||sin Theta(S_r(H_val), S_r(F_hat))||_2
  double epsilon_t = 0.0;   // ||R_t||_2 + ||F_val - F_hat||_2
  double gamma_t = 0.0;     // eigengap of F_hat at rank r
  double bound_rhs = 0.0;   // epsilon_t / gamma_t + slack
  bool holds = false;
  bool degenerate = false;  // gap too small for the bound; instance skipped
};

/// Exact validation Hessian vs the empirical Fisher proxy built from stored
/// f32 gradient features; asserts the sin-theta bound at rank r.
Theorem3Report theorem3_end_to_end(const NllToyModel& model, std::span<const double> theta,
                                   std::span<const NllExample> examples, std::size_t r);

/// ||H_val - F_hat||_2 at theta; the quantity the warmup is supposed to
/// shrink.
double proxy_mismatch_norm(const NllToyModel& model, std::span<const double> theta,
                           std::span<const NllExample> examples);

}  // namespace gist::oracle
