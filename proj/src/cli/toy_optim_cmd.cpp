// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include <ostream>

#include "cli/cli_detail.hpp"
#include "gist/cli.hpp"
#include "gist/errors.hpp"

namespace gist::cli {

int run_toy_optim(const ToyOptimArgs& args, std::ostream& out) {
  if (args.steps < 1) {
    throw ArgumentError("toy-optim: steps must be >= 1");
  }
  detail::ensure_dir(args.output_dir);

  const auto landscape = args.landscape == ToyLandscape::coupled
                             ? oracle::QuadraticLandscape::coupled_example()
                             : oracle::QuadraticLandscape::axis_aligned_example();

  oracle::TrajectoryOptions options;
  options.newton_lr = args.newton_lr;
  options.gd_lr = args.gd_lr;
  options.adam.base_lr = args.adam_lr;
  options.adam.schedule = {oracle::LrSchedule::Kind::linear_decay, args.steps};

  const auto trajectory =
      oracle::run_trajectory(landscape, args.optimizer, args.theta0, args.steps, options);
  oracle::write_trajectory_csv(trajectory, args.output_dir / "trajectory.csv");

  nlohmann::json config;
  config["landscape"] = args.landscape == ToyLandscape::coupled ? "coupled" : "diag";
  config["optimizer"] = std::string(oracle::optimizer_name(args.optimizer));
  config["steps"] = args.steps;
  config["newton_lr"] = args.newton_lr;
  config["gd_lr"] = args.gd_lr;
  config["adam_lr"] = args.adam_lr;
  config["theta0"] = args.theta0;
  config["output_dir"] = args.output_dir.string();
  detail::write_text(args.output_dir / "resolved_config.json", config.dump(2) + "\n");

  out << trajectory.optimizer_tag << " final loss " << trajectory.points.back().loss << " after "
      << args.steps << " steps\n";
  return 0;
}

}  // namespace gist::cli
