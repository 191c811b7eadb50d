// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include "gist/oracle/influence.hpp"

#include <cmath>

#include "gist/errors.hpp"
#include "gist/gradstore.hpp"
#include "gist/kernels.hpp"
#include "gist/spectral.hpp"

namespace gist::oracle {

double influence_score(std::span<const double> validation_gradient,
                       const linalg::SymmetricEigen& hessian_eig,
                       std::span<const double> candidate_gradient) {
  if (validation_gradient.size() != candidate_gradient.size()) {
    throw ArgumentError("influence_score: gradient dimensions differ");
  }
  const auto preconditioned = hessian_eig.apply_pinv(candidate_gradient, kPinvRelCutoff);
  return kernels::dot_dd(validation_gradient.data(), preconditioned.data(),
                         validation_gradient.size());
}

double influence_score(std::span<const double> validation_gradient, const linalg::Matrix& hessian,
                       std::span<const double> candidate_gradient) {
  if (hessian.rows() != validation_gradient.size()) {
    throw ArgumentError("influence_score: hessian does not match gradient dimension");
  }
  return influence_score(validation_gradient, linalg::eigh(hessian), candidate_gradient);
}

UtilityDecomposition decompose_utility(std::span<const double> validation_gradient,
                                       std::span<const double> candidate_gradient,
                                       const linalg::Matrix& hessian_psd) {
  if (validation_gradient.size() != candidate_gradient.size()) {
    throw ArgumentError("decompose_utility: gradient dimensions differ");
  }
  if (hessian_psd.rows() != validation_gradient.size()) {
    throw ArgumentError("decompose_utility: hessian does not match gradient dimension");
  }
  const linalg::SymmetricEigen eig = linalg::eigh(hessian_psd);
  const auto tilde_val = eig.apply_pinv_sqrt(validation_gradient, kPinvRelCutoff);
  const auto tilde_cand = eig.apply_pinv_sqrt(candidate_gradient, kPinvRelCutoff);

  UtilityDecomposition out;
  const std::size_t d = tilde_val.size();
  out.magnitude_val = std::sqrt(kernels::dot_dd(tilde_val.data(), tilde_val.data(), d));
  out.magnitude_cand = std::sqrt(kernels::dot_dd(tilde_cand.data(), tilde_cand.data(), d));
  if (out.magnitude_val > 0.0 && out.magnitude_cand > 0.0) {
    out.cosine = kernels::dot_dd(tilde_val.data(), tilde_cand.data(), d) /
                 (out.magnitude_val * out.magnitude_cand);
  }
  return out;
}

PredictionCheck influence_prediction_check(const NllToyModel& model, std::span<const double> theta,
                                           std::span<const NllExample> examples,
                                           const NllExample& candidate, double lr) {
  const linalg::Matrix hessian = model.mean_hessian(theta, examples);
  const linalg::SymmetricEigen eig = linalg::eigh(hessian);
  const auto g_val = model.mean_gradient(theta, examples);
  const auto g_cand = model.example_gradient(theta, candidate);

  PredictionCheck check;
  check.predicted = -lr * influence_score(g_val, eig, g_cand);

  const auto direction = eig.apply_pinv(g_cand, kPinvRelCutoff);
  std::vector<double> moved(theta.begin(), theta.end());
  for (std::size_t i = 0; i < moved.size(); ++i) {
    moved[i] -= lr * direction[i];
  }
  const double before = model.mean_loss(theta, examples);
  const double after = model.mean_loss(moved, examples);
  if (!std::isfinite(after)) {
    throw DivergenceError("influence_prediction_check: non-finite loss after the step");
  }
  check.actual = after - before;
  return check;
}

Theorem3Report theorem3_end_to_end(const NllToyModel& model, std::span<const double> theta,
                                   std::span<const NllExample> examples, std::size_t r) {
  if (examples.empty()) {
    throw ArgumentError("theorem3_end_to_end: empty validation set");
  }
  const std::size_t d = model.parameter_dim();
  if (r == 0 || r >= d) {
    throw ArgumentError("theorem3_end_to_end: rank must lie in [1, d-1]");
  }

  const linalg::Matrix h_val = model.mean_hessian(theta, examples);
  const linalg::Matrix f_val = model.mean_fisher(theta, examples);
  const linalg::Matrix residual = h_val - f_val;

  // the proxy is built from the same f32 features the pipeline would store
  std::vector<float> rows(examples.size() * d);
  std::vector<std::string> ids(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto g = model.example_gradient(theta, examples[i]);
    for (std::size_t j = 0; j < d; ++j) {
      rows[i * d + j] = static_cast<float>(g[j]);
    }
    ids[i] = "val_" + std::to_string(i);
  }
  const gradstore::GradientMatrix g_matrix(examples.size(), d, std::move(rows), std::move(ids),
                                           "theorem3");
  const linalg::Matrix f_hat =
      spectral::accumulate_gram({&g_matrix, 1}, spectral::GramMode::col_gram);

  Theorem3Report report;
  report.rank = r;
  report.epsilon_t =
      linalg::spectral_norm_sym(residual) + linalg::spectral_norm_sym(f_val - f_hat);

  const linalg::SymmetricEigen eig_hat = linalg::eigh(f_hat);
  report.gamma_t = eig_hat.values[r - 1] - eig_hat.values[r];
  double scale = 0.0;
  for (double v : eig_hat.values) scale = std::max(scale, std::abs(v));
  if (report.gamma_t <= spectral::kDegenerateGapRel * std::max(scale, 1e-300)) {
    report.degenerate = true;
    return report;
  }

  const linalg::SymmetricEigen eig_h = linalg::eigh(h_val);
  report.sin_theta =
      spectral::principal_angles(eig_h.top_vectors(r), eig_hat.top_vectors(r)).sin_theta_max;
  report.bound_rhs = report.epsilon_t / report.gamma_t + 1e-9;
  report.holds = report.sin_theta <= report.bound_rhs;
  return report;
}

double proxy_mismatch_norm(const NllToyModel& model, std::span<const double> theta,
                           std::span<const NllExample> examples) {
  const std::size_t d = model.parameter_dim();
  const linalg::Matrix h_val = model.mean_hessian(theta, examples);

  linalg::Matrix f_hat(d, d);
  for (const auto& e : examples) {
    const auto g = model.example_gradient(theta, e);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        f_hat(i, j) += g[i] * g[j];
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(examples.size());
  for (std::size_t i = 0; i < d * d; ++i) f_hat.data()[i] *= inv;

  return linalg::spectral_norm_sym(h_val - f_hat);
}

}  // namespace gist::oracle
