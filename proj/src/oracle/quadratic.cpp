// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include "gist/oracle/quadratic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "gist/errors.hpp"

namespace gist::oracle {

QuadraticLandscape::QuadraticLandscape(linalg::Matrix h) : hessian(std::move(h)) {
  if (hessian.rows() != hessian.cols() || hessian.rows() == 0) {
    throw ArgumentError("QuadraticLandscape: hessian must be square and nonempty");
  }
  const double scale = linalg::frobenius_norm(hessian);
  if (scale > 0.0 && linalg::asymmetry(hessian) > 1e-12 * scale) {
    throw ValidationError("QuadraticLandscape: hessian not symmetric");
  }
}

double QuadraticLandscape::loss(std::span<const double> theta) const {
  const auto g = linalg::matvec(hessian, theta);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    acc += theta[i] * g[i];
  }
  return 0.5 * acc;
}

std::vector<double> QuadraticLandscape::gradient(std::span<const double> theta) const {
  return linalg::matvec(hessian, theta);
}

QuadraticLandscape QuadraticLandscape::axis_aligned_example() {
  linalg::Matrix h(2, 2);
  h(0, 0) = 20.0;
  h(1, 1) = 1.0;
  return QuadraticLandscape(std::move(h));
}

QuadraticLandscape QuadraticLandscape::coupled_example() {
  linalg::Matrix h(2, 2);
  h(0, 0) = 10.5;
  h(0, 1) = 9.5;
  h(1, 0) = 9.5;
  h(1, 1) = 10.5;
  return QuadraticLandscape(std::move(h));
}

std::vector<double> newton_step(const QuadraticLandscape& landscape, std::span<const double> theta,
                                double lr) {
  if (theta.size() != landscape.dim()) {
    throw ArgumentError("newton_step: theta dimension mismatch");
  }
  const auto gradient = landscape.gradient(theta);
  const linalg::SymmetricEigen eig = linalg::eigh(landscape.hessian);
  const auto direction = eig.apply_pinv(gradient, 1e-10);
  std::vector<double> next(theta.begin(), theta.end());
  for (std::size_t i = 0; i < next.size(); ++i) {
    next[i] -= lr * direction[i];
  }
  return next;
}

std::string_view optimizer_name(Optimizer opt) {
  switch (opt) {
    case Optimizer::newton:
      return "newton";
    case Optimizer::adam:
      return "adam";
    case Optimizer::gd:
      return "gd";
  }
  return "unknown";
}

Trajectory run_trajectory(const QuadraticLandscape& landscape, Optimizer optimizer,
                          std::span<const double> theta0, std::size_t steps,
                          const TrajectoryOptions& options) {
  if (steps < 1) {
    throw ArgumentError("run_trajectory: steps must be >= 1");
  }
  if (theta0.size() != landscape.dim()) {
    throw ArgumentError("run_trajectory: theta0 dimension mismatch");
  }

  Trajectory trajectory;
  trajectory.optimizer_tag = optimizer_name(optimizer);
  std::vector<double> theta(theta0.begin(), theta0.end());
  AdamState adam = AdamState::init(theta.size(), options.adam);

  auto record = [&](std::size_t step) {
    const double loss = landscape.loss(theta);
    if (!std::isfinite(loss)) {
      throw DivergenceError("run_trajectory: non-finite loss at step " + std::to_string(step));
    }
    trajectory.points.push_back({step, theta, loss});
  };

  record(0);
  for (std::size_t s = 1; s <= steps; ++s) {
    switch (optimizer) {
      case Optimizer::newton:
        theta = newton_step(landscape, theta, options.newton_lr);
        break;
      case Optimizer::adam: {
        auto result = adam_step(adam, theta, landscape.gradient(theta));
        theta = std::move(result.theta);
        adam = std::move(result.state);
        break;
      }
      case Optimizer::gd: {
        const auto g = landscape.gradient(theta);
        for (std::size_t i = 0; i < theta.size(); ++i) {
          theta[i] -= options.gd_lr * g[i];
        }
        break;
      }
    }
    record(s);
  }
  return trajectory;
}

void write_trajectory_csv(const Trajectory& trajectory, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("write_trajectory_csv: cannot open " + path.string());
  }
  const std::size_t dim = trajectory.points.empty() ? 0 : trajectory.points.front().theta.size();
  out << "step";
  for (std::size_t i = 0; i < dim; ++i) {
    out << ",theta_" << i;
  }
  out << ",loss\n";
  char buf[64];
  for (const auto& point : trajectory.points) {
    out << point.step;
    for (double v : point.theta) {
      std::snprintf(buf, sizeof(buf), ",%.17g", v);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.17g\n", point.loss);
    out << buf;
  }
  out.flush();
  if (!out) {
    throw IoError("write_trajectory_csv: write failed for " + path.string());
  }
}

DiagonalFloor diagonal_floor(double rho) {
  linalg::Matrix h(2, 2);
  h(0, 0) = 1.0;
  h(0, 1) = rho;
  h(1, 0) = rho;
  h(1, 1) = 1.0;
  return diagonal_floor(h);
}

DiagonalFloor diagonal_floor(const linalg::Matrix& hessian) {
  if (hessian.rows() != 2 || hessian.cols() != 2) {
    throw ArgumentError("diagonal_floor: expects a 2x2 matrix");
  }
  if (std::abs(hessian(0, 0) - 1.0) > 1e-12 || std::abs(hessian(1, 1) - 1.0) > 1e-12 ||
      std::abs(hessian(0, 1) - hessian(1, 0)) > 1e-12) {
    throw ArgumentError("diagonal_floor: expects unit diagonal and symmetric coupling");
  }
  // ||H - D||_F^2 = (1-d1)^2 + (1-d2)^2 + 2 rho^2, minimized at d1 = d2 = 1
  const double rho = hessian(0, 1);
  DiagonalFloor floor;
  floor.minimized = hessian(0, 1) * hessian(0, 1) + hessian(1, 0) * hessian(1, 0);
  floor.analytic_floor = 2.0 * rho * rho;
  return floor;
}

}  // namespace gist::oracle
