// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gist/linalg.hpp"
#include "gist/oracle/adam.hpp"

// Multinomial-logit toy model with factored (bilinear) logits
//   z = U (V^T x),  loss = -log softmax(z)[y].
// The factorization makes the model map nonlinear in the parameters, so the
// Hessian splits into an analytic PSD Gauss-Newton/Fisher term J^T S J plus
// an analytic residual term that scales with the prediction error. Everything
// (loss, gradient, Fisher, residual, Hessian) is exact and in closed form,
// which is what makes this model usable as an oracle.
//
// Parameter layout: theta = [vec_cm(U); vec_cm(V)], column-major blocks.

namespace gist::oracle {

struct NllExample {
  std::vector<double> x;
  std::size_t label = 0;
};

class NllToyModel {
 public:
  NllToyModel(std::size_t n_classes, std::size_t n_features, std::size_t factor_rank,
              std::vector<NllExample> dataset);

  std::size_t n_classes() const { return n_classes_; }
  std::size_t n_features() const { return n_features_; }
  std::size_t factor_rank() const { return factor_rank_; }
  std::size_t parameter_dim() const { return factor_rank_ * (n_classes_ + n_features_); }

  const std::vector<NllExample>& dataset() const { return dataset_; }

  double example_loss(std::span<const double> theta, const NllExample& example) const;
  std::vector<double> example_gradient(std::span<const double> theta,
                                       const NllExample& example) const;
  /// Exact Hessian = fisher + residual.
  linalg::Matrix example_hessian(std::span<const double> theta, const NllExample& example) const;
  /// Gauss-Newton/Fisher term J^T (diag(p) - p p^T) J; PSD.
  linalg::Matrix example_fisher(std::span<const double> theta, const NllExample& example) const;
  /// Residual curvature sum_c (p - e_y)_c grad^2 z_c; vanishes as p -> e_y.
  linalg::Matrix example_residual(std::span<const double> theta, const NllExample& example) const;

  double mean_loss(std::span<const double> theta, std::span<const NllExample> examples) const;
  std::vector<double> mean_gradient(std::span<const double> theta,
                                    std::span<const NllExample> examples) const;
  linalg::Matrix mean_hessian(std::span<const double> theta,
                              std::span<const NllExample> examples) const;
  linalg::Matrix mean_fisher(std::span<const double> theta,
                             std::span<const NllExample> examples) const;
  linalg::Matrix mean_residual(std::span<const double> theta,
                               std::span<const NllExample> examples) const;

  /// Small random parameter vector.
  static std::vector<double> random_theta(std::size_t dim, std::uint64_t seed, double scale = 0.1);

 private:
  std::size_t n_classes_;
  std::size_t n_features_;
  std::size_t factor_rank_;
  std::vector<NllExample> dataset_;
};

struct TrainResult {
  std::vector<double> theta;
  std::vector<double> losses;          // one per optimizer step
  std::vector<std::size_t> subset;     // indices trained on
};

/// Per-example Adam over `examples` for the given epochs (reshuffled each
/// epoch). Deterministic under a fixed seed.
TrainResult adam_train(const NllToyModel& model, std::span<const double> theta0,
                       std::span<const NllExample> examples, std::size_t epochs,
                       const AdamParams& params, std::uint64_t seed);

AdamParams warmup_defaults();

/// Trains on a random warmup_fraction of the model's dataset and returns the
/// checkpoint plus the loss curve.
TrainResult warmup_train(const NllToyModel& model, std::span<const double> theta0,
                         double warmup_fraction, std::size_t epochs, std::uint64_t seed,
                         const AdamParams& params = warmup_defaults());

// --- instance factories -------------------------------------------------

/// Small class-clustered instance for the subspace-stability checks
/// (d <= 40, n_val <= 12).
NllToyModel make_spectrum_instance(std::uint64_t seed, std::size_t n_examples = 12,
                                   std::size_t n_classes = 3, std::size_t n_features = 6,
                                   std::size_t factor_rank = 2);

struct TargetedTaskOptions {
  std::size_t n_classes = 3;
  std::size_t n_features = 8;   // first half on-task block, second half off-task
  std::size_t factor_rank = 2;
  std::size_t n_on = 100;       // on-target candidates (clean labels)
  std::size_t n_off = 300;      // off-target candidates (distractors)
  std::size_t n_val = 9;        // on-target validation examples
  double cluster_noise = 0.7;
  double leak_noise = 0.1;        // off-block contamination
  double mislabeled_fraction = 0.5;  // share of distractors that are mislabeled
                                     // on-distribution examples (label noise)
};

/// A targeted-selection benchmark. The candidate pool mixes on-target
/// examples with two kinds of distractors: a foreign task living in the
/// other feature block, and mislabeled on-distribution examples whose
/// gradients point against the target directions; the validation set is
/// on-target only.
struct TargetedTask {
  NllToyModel model;                     // dataset = candidate pool
  std::vector<std::string> candidate_ids;  // "on:*" / "off:*"
  std::vector<NllExample> val_set;
  std::vector<std::string> val_ids;
  std::vector<double> theta0;
};

TargetedTask make_targeted_task(std::uint64_t seed, const TargetedTaskOptions& options = {});

}  // namespace gist::oracle
