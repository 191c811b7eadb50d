// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "gist/errors.hpp"
#include "gist/linalg.hpp"
#include "gist/oracle/adam.hpp"
#include "gist/oracle/quadratic.hpp"

using namespace gist;
using oracle::AdamState;
using oracle::Optimizer;
using oracle::QuadraticLandscape;

TEST_SUITE("oracle_toy") {

TEST_CASE("the coupled toy hessian shares the axis-aligned spectrum {20, 1}") {
  const auto eig = linalg::eigh(QuadraticLandscape::coupled_example().hessian);
  CHECK(std::abs(eig.values[0] - 20.0) <= 1e-9);
  CHECK(std::abs(eig.values[1] - 1.0) <= 1e-9);
}

TEST_CASE("one newton step from (-2.5, 0) reaches the origin") {
  const auto landscape = QuadraticLandscape::coupled_example();
  const std::vector<double> theta0 = {-2.5, 0.0};
  const auto theta1 = oracle::newton_step(landscape, theta0, 1.0);
  CHECK(std::abs(theta1[0]) <= 1e-10);
  CHECK(std::abs(theta1[1]) <= 1e-10);
}

TEST_CASE("newton leaves stationary points alone") {
  const auto landscape = QuadraticLandscape::axis_aligned_example();
  const std::vector<double> origin = {0.0, 0.0};
  const auto moved = oracle::newton_step(landscape, origin, 1.0);
  CHECK(moved[0] == 0.0);
  CHECK(moved[1] == 0.0);
}

TEST_CASE("newton with a singular hessian skips the null space") {
  linalg::Matrix h(2, 2);
  h(0, 0) = 1.0;
  const QuadraticLandscape landscape(std::move(h));
  const std::vector<double> theta = {1.0, 1.0};
  const auto next = oracle::newton_step(landscape, theta, 1.0);
  CHECK(std::abs(next[0]) <= 1e-12);
  CHECK(next[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("adam's first toy step matches the closed form") {
  // g = H theta0 = (-26.25, -23.75); the first update reduces to
  // lr * g / (|g| + eps) per coordinate
  const auto landscape = QuadraticLandscape::coupled_example();
  const std::vector<double> theta0 = {-2.5, 0.0};
  const auto g = landscape.gradient(theta0);
  CHECK(g[0] == doctest::Approx(-26.25).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(-23.75).epsilon(1e-15));

  AdamState state = AdamState::toy_defaults(2);
  const auto result = oracle::adam_step(state, theta0, g);
  CHECK(std::abs(result.theta[0] - (-2.25)) <= 1e-8);
  CHECK(std::abs(result.theta[1] - 0.25) <= 1e-8);
  CHECK(result.state.step_count == 1);
}

TEST_CASE("zero gradients leave adam's state and iterate untouched") {
  AdamState state = AdamState::init(3);
  std::vector<double> theta = {1.0, -2.0, 3.0};
  const std::vector<double> zero(3, 0.0);
  for (int step = 0; step < 10; ++step) {
    auto result = oracle::adam_step(state, theta, zero);
    CHECK(result.theta == theta);
    for (double v : result.state.v) CHECK(v == 0.0);
    state = std::move(result.state);
  }
}

TEST_CASE("adam_step reproduces a literal step-by-step recomputation bit-for-bit") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t dim = 4;

  oracle::AdamParams params;
  params.base_lr = 0.1;
  params.schedule = {oracle::LrSchedule::Kind::linear_decay, 60};
  AdamState state = AdamState::init(dim, params);
  std::vector<double> theta(dim, 0.5);

  // independent reference: the raw update equations, recomputed in place
  std::vector<double> ref_m(dim, 0.0), ref_v(dim, 0.0), ref_theta(dim, 0.5);
  for (std::size_t t = 0; t < 50; ++t) {
    std::vector<double> g(dim);
    for (auto& x : g) x = normal(rng);

    auto result = oracle::adam_step(state, theta, g);
    theta = std::move(result.theta);
    state = std::move(result.state);

    const double beta1 = 0.9, beta2 = 0.999;
    const double lr =
        0.1 * std::max(1.0 - static_cast<double>(t) / 60.0, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      ref_m[i] = beta1 * ref_m[i] + (1.0 - beta1) * g[i];
      ref_v[i] = beta2 * ref_v[i] + (1.0 - beta2) * g[i] * g[i];
      const double m_hat = ref_m[i] / (1.0 - std::pow(beta1, static_cast<double>(t + 1)));
      const double v_hat = ref_v[i] / (1.0 - std::pow(beta2, static_cast<double>(t + 1)));
      ref_theta[i] -= lr * m_hat / (std::sqrt(v_hat) + 1e-8);
    }
    CHECK(theta == ref_theta);  // bitwise
    CHECK(state.m == ref_m);
    CHECK(state.v == ref_v);
  }
}

TEST_CASE("trajectories") {
  const auto coupled = QuadraticLandscape::coupled_example();
  const std::vector<double> theta0 = {-2.5, 0.0};

  SUBCASE("newton converges in one step on any nonsingular quadratic") {
    const auto traj = oracle::run_trajectory(coupled, Optimizer::newton, theta0, 1, {});
    REQUIRE(traj.points.size() == 2);
    CHECK(traj.points[0].step == 0);
    CHECK(traj.points[1].loss <= 1e-18);
  }
  SUBCASE("adam on the coupled landscape cannot match newton") {
    oracle::TrajectoryOptions options;
    options.adam = AdamState::toy_defaults(2).params;
    const auto adam = oracle::run_trajectory(coupled, Optimizer::adam, theta0, 45, options);
    const auto newton = oracle::run_trajectory(coupled, Optimizer::newton, theta0, 1, {});
    CHECK(adam.points.back().loss > newton.points.back().loss);
    CHECK(adam.points.back().loss > 1e-18);
  }
  SUBCASE("coupling never helps adam versus the axis-aligned twin") {
    oracle::TrajectoryOptions options;
    options.adam = AdamState::toy_defaults(2).params;
    const auto on_coupled = oracle::run_trajectory(coupled, Optimizer::adam, theta0, 45, options);
    const auto on_diag = oracle::run_trajectory(QuadraticLandscape::axis_aligned_example(),
                                                Optimizer::adam, theta0, 45, options);
    CHECK(on_coupled.points.back().loss >= on_diag.points.back().loss);
  }
  SUBCASE("divergence names the offending step") {
    oracle::TrajectoryOptions options;
    options.gd_lr = 1e150;  // guaranteed overflow within a few steps
    try {
      oracle::run_trajectory(coupled, Optimizer::gd, theta0, 20, options);
      FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
      CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
  }
  SUBCASE("csv export has one row per point") {
    const auto traj = oracle::run_trajectory(coupled, Optimizer::gd, theta0, 5, {});
    const auto path = std::filesystem::temp_directory_path() / "gist_traj.csv";
    oracle::write_trajectory_csv(traj, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "step,theta_0,theta_1,loss");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 6);
  }
}

TEST_CASE("diagonal surrogate error floor") {
  SUBCASE("no coupling, no floor") {
    const auto floor = oracle::diagonal_floor(0.0);
    CHECK(floor.minimized == 0.0);
    CHECK(floor.analytic_floor == 0.0);
  }
  SUBCASE("rho = 0.5 floors at 0.5") {
    const auto floor = oracle::diagonal_floor(0.5);
    CHECK(floor.minimized == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(floor.analytic_floor == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("random diagonals never beat the floor") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
      const double rho = unif(rng);
      const double d1 = unif(rng);
      const double d2 = unif(rng);
      const double frob = (1.0 - d1) * (1.0 - d1) + (1.0 - d2) * (1.0 - d2) + 2.0 * rho * rho;
      CHECK(frob >= oracle::diagonal_floor(rho).analytic_floor - 1e-15);
    }
  }
  SUBCASE("non-unit diagonals are rejected") {
    linalg::Matrix h(2, 2);
    h(0, 0) = 2.0;
    h(1, 1) = 1.0;
    CHECK_THROWS_AS(oracle::diagonal_floor(h), ArgumentError);
  }
}

}  // TEST_SUITE
