// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gist/linalg.hpp"
#include "gist/oracle/adam.hpp"

// Quadratic toy landscapes L(theta) = 1/2 theta^T H theta with the minimizer
// at the origin, plus the optimizers run on them. The coupled/axis-aligned
// pair shares one spectrum {20, 1} and differs only by rotation, which is
// exactly what a diagonal preconditioner cannot represent.

namespace gist::oracle {

struct QuadraticLandscape {
  linalg::Matrix hessian;

  explicit QuadraticLandscape(linalg::Matrix h);

  std::size_t dim() const { return hessian.rows(); }
  double loss(std::span<const double> theta) const;
  std::vector<double> gradient(std::span<const double> theta) const;

  /// diag(20, 1).
  static QuadraticLandscape axis_aligned_example();
  /// R diag(20, 1) R^T = [[10.5, 9.5], [9.5, 10.5]].
  static QuadraticLandscape coupled_example();
};

/// theta - lr * H^+ (H theta); the pseudoinverse leaves null-space
/// coordinates untouched. With lr = 1 and nonsingular H this lands on the
/// minimizer exactly.
std::vector<double> newton_step(const QuadraticLandscape& landscape, std::span<const double> theta,
                                double lr);

enum class Optimizer { newton, adam, gd };

std::string_view optimizer_name(Optimizer opt);

struct TrajectoryPoint {
  std::size_t step = 0;
  std::vector<double> theta;
  double loss = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;  // includes step 0
  std::string optimizer_tag;
};

struct TrajectoryOptions {
  double newton_lr = 1.0;
  double gd_lr = 0.04;
  AdamParams adam;  // toy defaults wired by the callers that want them
};

/// Full trajectory with losses; throws DivergenceError naming the first step
/// with a non-finite loss.
Trajectory run_trajectory(const QuadraticLandscape& landscape, Optimizer optimizer,
                          std::span<const double> theta0, std::size_t steps,
                          const TrajectoryOptions& options = {});

/// CSV columns: step, theta_0..theta_{p-1}, loss.
void write_trajectory_csv(const Trajectory& trajectory, const std::filesystem::path& path);

struct DiagonalFloor {
  double minimized = 0.0;      // min over diagonal D of ||H - D||_F^2
  double analytic_floor = 0.0;  // 2 rho^2
};

/// For H = [[1, rho], [rho, 1]]: the best diagonal surrogate still misses the
/// coupling by 2 rho^2.
DiagonalFloor diagonal_floor(double rho);
DiagonalFloor diagonal_floor(const linalg::Matrix& hessian);

}  // namespace gist::oracle
