// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gist::oracle {

/// Per-step learning rate: constant, or linear decay to zero over a horizon.
struct LrSchedule {
  enum class Kind { constant, linear_decay };
  Kind kind = Kind::constant;
  std::size_t horizon = 0;  // linear decay only

  double at(double base_lr, std::size_t step) const;
};

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double base_lr = 0.25;
  LrSchedule schedule;
};

/// EMA state of the Adam optimizer. The inverse sqrt second moment acts as a
/// diagonal preconditioner; it can rescale axes but cannot rotate them.
struct AdamState {
  AdamParams params;
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step_count = 0;

  static AdamState init(std::size_t dim, const AdamParams& params = {});

  /// The 2D toy setup: (0.9, 0.999), lr 0.25 with linear decay over 45 steps.
  static AdamState toy_defaults(std::size_t dim);
};

struct AdamStepResult {
  std::vector<double> theta;
  AdamState state;
};

/// One bias-corrected Adam update at the state's scheduled learning rate.
AdamStepResult adam_step(const AdamState& state, std::span<const double> theta,
                         std::span<const double> gradient);

}  // namespace gist::oracle
