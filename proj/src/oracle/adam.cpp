// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include "gist/oracle/adam.hpp"

#include <cmath>

#include "gist/errors.hpp"

namespace gist::oracle {

double LrSchedule::at(double base_lr, std::size_t step) const {
  if (kind == Kind::constant) {
    return base_lr;
  }
  if (horizon == 0) {
    throw ArgumentError("LrSchedule: linear decay needs a positive horizon");
  }
  const double frac = 1.0 - static_cast<double>(step) / static_cast<double>(horizon);
  return base_lr * std::max(frac, 0.0);
}

AdamState AdamState::init(std::size_t dim, const AdamParams& params) {
  AdamState state;
  state.params = params;
  state.m.assign(dim, 0.0);
  state.v.assign(dim, 0.0);
  return state;
}

AdamState AdamState::toy_defaults(std::size_t dim) {
  AdamParams params;
  params.base_lr = 0.25;
  params.schedule = {LrSchedule::Kind::linear_decay, 45};
  return init(dim, params);
}

AdamStepResult adam_step(const AdamState& state, std::span<const double> theta,
                         std::span<const double> gradient) {
  const std::size_t dim = state.m.size();
  if (theta.size() != dim || gradient.size() != dim) {
    throw ArgumentError("adam_step: dimension mismatch");
  }

  AdamStepResult result;
  result.state = state;
  result.theta.assign(theta.begin(), theta.end());

  const auto& p = state.params;
  const std::size_t t = state.step_count;
  const double m_corr = 1.0 - std::pow(p.beta1, static_cast<double>(t + 1));
  const double v_corr = 1.0 - std::pow(p.beta2, static_cast<double>(t + 1));
  const double lr = p.schedule.at(p.base_lr, t);

  for (std::size_t i = 0; i < dim; ++i) {
    const double g = gradient[i];
    const double m_next = p.beta1 * state.m[i] + (1.0 - p.beta1) * g;
    const double v_next = p.beta2 * state.v[i] + (1.0 - p.beta2) * g * g;
    result.state.m[i] = m_next;
    result.state.v[i] = v_next;
    const double m_hat = m_next / m_corr;
    const double v_hat = v_next / v_corr;
    result.theta[i] -= lr * m_hat / (std::sqrt(v_hat) + p.epsilon);
  }
  result.state.step_count = t + 1;
  return result;
}

}  // namespace gist::oracle
