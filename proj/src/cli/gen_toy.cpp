// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include <ostream>
#include <random>

#include "cli/cli_detail.hpp"
#include "gist/cli.hpp"
#include "gist/errors.hpp"
#include "gist/gradstore.hpp"
#include "gist/oracle/lora.hpp"
#include "gist/oracle/nll.hpp"
#include "gist/oracle/quadratic.hpp"

namespace gist::cli {

namespace {

nlohmann::json matrix_json(const linalg::Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

gradstore::GradientMatrix to_features(const std::vector<std::vector<double>>& gradients,
                                      const std::vector<std::string>& ids,
                                      const std::string& tag) {
  const std::size_t n = gradients.size();
  const std::size_t d = gradients.front().size();
  std::vector<float> values(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      values[i * d + j] = static_cast<float>(gradients[i][j]);
    }
  }
  return gradstore::GradientMatrix(n, d, std::move(values), ids, tag);
}

nlohmann::json examples_json(std::span<const oracle::NllExample> examples) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : examples) {
    nlohmann::json one;
    one["x"] = e.x;
    one["label"] = e.label;
    arr.push_back(std::move(one));
  }
  return arr;
}

nlohmann::json gen_quadratic(const GenToyArgs& args, const std::string& tag,
                             const std::filesystem::path& dir) {
  std::mt19937_64 rng(args.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t p = 6;

  // random PSD hessian with a comfortable spectrum
  linalg::Matrix factor(p, p);
  for (std::size_t i = 0; i < p * p; ++i) factor.data()[i] = normal(rng);
  linalg::Matrix hessian(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      double acc = (i == j) ? 0.5 : 0.0;
      for (std::size_t k = 0; k < p; ++k) acc += factor(k, i) * factor(k, j);
      hessian(i, j) = acc;
      hessian(j, i) = acc;
    }
  }
  const oracle::QuadraticLandscape landscape(hessian);

  auto draw_pool = [&](std::size_t count, const std::string& prefix) {
    std::vector<std::vector<double>> points, gradients;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<double> theta(p);
      for (auto& v : theta) v = normal(rng);
      gradients.push_back(landscape.gradient(theta));
      points.push_back(std::move(theta));
      ids.push_back(prefix + std::to_string(i));
    }
    return std::tuple{points, gradients, ids};
  };
  const auto [t_points, t_grads, t_ids] = draw_pool(5, "val:");
  const auto [c_points, c_grads, c_ids] = draw_pool(40, "cand:");
  gradstore::write_features(to_features(t_grads, t_ids, tag), dir / "targets.feat");
  gradstore::write_features(to_features(c_grads, c_ids, tag), dir / "candidates.feat");

  nlohmann::json truth;
  truth["kind"] = "quadratic";
  truth["hessian"] = matrix_json(hessian);
  truth["minimizer"] = std::vector<double>(p, 0.0);
  truth["target_points"] = t_points;
  truth["candidate_points"] = c_points;
  return truth;
}

nlohmann::json gen_lora(const GenToyArgs& args, const std::string& tag,
                        const std::filesystem::path& dir) {
  auto model = oracle::LoraModel::random(args.seed, 3, 4, 2, /*coupled=*/true);
  std::mt19937_64 rng(args.seed ^ 0xabcdefULL);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto draw_pool = [&](std::size_t count, const std::string& prefix) {
    std::vector<std::vector<double>> qs, gradients;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<double> q(model.w_dim());
      for (auto& v : q) v = normal(rng);
      oracle::LoraModel per_example = model;
      per_example.linear = q;
      gradients.push_back(per_example.adapter_gradient());
      qs.push_back(std::move(q));
      ids.push_back(prefix + std::to_string(i));
    }
    return std::tuple{qs, gradients, ids};
  };
  const auto [t_qs, t_grads, t_ids] = draw_pool(6, "val:");
  const auto [c_qs, c_grads, c_ids] = draw_pool(40, "cand:");
  gradstore::write_features(to_features(t_grads, t_ids, tag), dir / "targets.feat");
  gradstore::write_features(to_features(c_grads, c_ids, tag), dir / "candidates.feat");

  nlohmann::json truth;
  truth["kind"] = "lora";
  truth["w0"] = matrix_json(model.w0);
  truth["b"] = matrix_json(model.b);
  truth["a"] = matrix_json(model.a);
  truth["h_w"] = matrix_json(model.h_w);
  truth["target_linear_terms"] = t_qs;
  truth["candidate_linear_terms"] = c_qs;
  return truth;
}

nlohmann::json gen_nll(const GenToyArgs& args, const std::string& tag,
                       const std::filesystem::path& dir) {
  oracle::TargetedTaskOptions options;
  options.n_val = args.n_val;
  options.n_on = args.n_candidates / 4;
  options.n_off = args.n_candidates - options.n_on;
  const auto task = oracle::make_targeted_task(args.seed, options);

  const auto warm = oracle::warmup_train(task.model, task.theta0, args.warmup_fraction,
                                         args.warmup_epochs, args.seed);
  const auto& theta = warm.theta;

  std::vector<std::vector<double>> val_grads, cand_grads;
  for (const auto& e : task.val_set) val_grads.push_back(task.model.example_gradient(theta, e));
  for (const auto& e : task.model.dataset()) {
    cand_grads.push_back(task.model.example_gradient(theta, e));
  }
  gradstore::write_features(to_features(val_grads, task.val_ids, tag), dir / "targets.feat");
  gradstore::write_features(to_features(cand_grads, task.candidate_ids, tag),
                            dir / "candidates.feat");

  nlohmann::json truth;
  truth["kind"] = "nll";
  truth["n_classes"] = task.model.n_classes();
  truth["n_features"] = task.model.n_features();
  truth["factor_rank"] = task.model.factor_rank();
  truth["theta0"] = task.theta0;
  truth["theta_t"] = theta;
  truth["warmup_subset"] = warm.subset;
  truth["val_examples"] = examples_json(task.val_set);
  truth["candidate_examples"] = examples_json(task.model.dataset());
  truth["val_hessian"] = matrix_json(task.model.mean_hessian(theta, task.val_set));
  return truth;
}

}  // namespace

int run_gen_toy(const GenToyArgs& args, std::ostream& out) {
  detail::ensure_dir(args.output_dir);
  std::string kind_name;
  switch (args.kind) {
    case ToyKind::quadratic:
      kind_name = "quadratic";
      break;
    case ToyKind::lora:
      kind_name = "lora";
      break;
    case ToyKind::nll:
      kind_name = "nll";
      break;
  }
  const std::string tag = "toy-" + kind_name + "-seed" + std::to_string(args.seed);

  nlohmann::json truth;
  switch (args.kind) {
    case ToyKind::quadratic:
      truth = gen_quadratic(args, tag, args.output_dir);
      break;
    case ToyKind::lora:
      truth = gen_lora(args, tag, args.output_dir);
      break;
    case ToyKind::nll:
      truth = gen_nll(args, tag, args.output_dir);
      break;
  }
  truth["seed"] = args.seed;
  truth["checkpoint_tag"] = tag;
  detail::write_text(args.output_dir / "ground_truth.json", truth.dump(2) + "\n");

  nlohmann::json config;
  config["kind"] = kind_name;
  config["seed"] = args.seed;
  config["output_dir"] = args.output_dir.string();
  config["n_val"] = args.n_val;
  config["n_candidates"] = args.n_candidates;
  config["warmup_epochs"] = args.warmup_epochs;
  config["warmup_fraction"] = args.warmup_fraction;
  detail::write_text(args.output_dir / "resolved_config.json", config.dump(2) + "\n");

  out << "wrote " << kind_name << " pools under " << args.output_dir.string() << "\n";
  return 0;
}

}  // namespace gist::cli
