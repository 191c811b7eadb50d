// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include "gist/oracle/nll.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gist/errors.hpp"

namespace gist::oracle {

namespace {

struct Forward {
  std::vector<double> h;      // V^T x, length m
  std::vector<double> probs;  // softmax(U h), length C
  double loss = 0.0;
};

}  // namespace

NllToyModel::NllToyModel(std::size_t n_classes, std::size_t n_features, std::size_t factor_rank,
                         std::vector<NllExample> dataset)
    : n_classes_(n_classes),
      n_features_(n_features),
      factor_rank_(factor_rank),
      dataset_(std::move(dataset)) {
  if (n_classes_ < 2 || n_features_ < 1 || factor_rank_ < 1) {
    throw ArgumentError("NllToyModel: need >= 2 classes, >= 1 feature, rank >= 1");
  }
  for (const auto& e : dataset_) {
    if (e.x.size() != n_features_ || e.label >= n_classes_) {
      throw ArgumentError("NllToyModel: example does not match the model shape");
    }
  }
}

// theta layout helpers: U is C x m, V is p x m, both column-major.
namespace {

inline std::size_t u_index(std::size_t i, std::size_t k, std::size_t C) { return i + C * k; }

inline std::size_t v_index(std::size_t j, std::size_t k, std::size_t C, std::size_t p,
                           std::size_t m) {
  return C * m + j + p * k;
}

Forward forward_pass(std::span<const double> theta, const NllExample& example, std::size_t C,
                     std::size_t p, std::size_t m) {
  Forward f;
  f.h.assign(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      acc += theta[v_index(j, k, C, p, m)] * example.x[j];
    }
    f.h[k] = acc;
  }
  std::vector<double> z(C, 0.0);
  for (std::size_t i = 0; i < C; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      acc += theta[u_index(i, k, C)] * f.h[k];
    }
    z[i] = acc;
  }
  const double z_max = *std::max_element(z.begin(), z.end());
  double denom = 0.0;
  for (double& zi : z) {
    zi = std::exp(zi - z_max);
    denom += zi;
  }
  f.probs.resize(C);
  for (std::size_t i = 0; i < C; ++i) {
    f.probs[i] = z[i] / denom;
  }
  f.loss = -std::log(std::max(f.probs[example.label], 1e-300));
  return f;
}

}  // namespace

double NllToyModel::example_loss(std::span<const double> theta, const NllExample& example) const {
  if (theta.size() != parameter_dim()) {
    throw ArgumentError("example_loss: theta dimension mismatch");
  }
  return forward_pass(theta, example, n_classes_, n_features_, factor_rank_).loss;
}

std::vector<double> NllToyModel::example_gradient(std::span<const double> theta,
                                                  const NllExample& example) const {
  if (theta.size() != parameter_dim()) {
    throw ArgumentError("example_gradient: theta dimension mismatch");
  }
  const std::size_t C = n_classes_, p = n_features_, m = factor_rank_;
  const Forward f = forward_pass(theta, example, C, p, m);

  std::vector<double> delta(f.probs);
  delta[example.label] -= 1.0;

  std::vector<double> grad(parameter_dim(), 0.0);
  for (std::size_t i = 0; i < C; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      grad[u_index(i, k, C)] = delta[i] * f.h[k];
    }
  }
  for (std::size_t k = 0; k < m; ++k) {
    double ut_delta = 0.0;
    for (std::size_t i = 0; i < C; ++i) {
      ut_delta += theta[u_index(i, k, C)] * delta[i];
    }
    for (std::size_t j = 0; j < p; ++j) {
      grad[v_index(j, k, C, p, m)] = ut_delta * example.x[j];
    }
  }
  return grad;
}

linalg::Matrix NllToyModel::example_fisher(std::span<const double> theta,
                                           const NllExample& example) const {
  if (theta.size() != parameter_dim()) {
    throw ArgumentError("example_fisher: theta dimension mismatch");
  }
  const std::size_t C = n_classes_, p = n_features_, m = factor_rank_;
  const std::size_t d = parameter_dim();
  const Forward f = forward_pass(theta, example, C, p, m);

  // J(c, .) = dz_c/dtheta
  linalg::Matrix jac(C, d);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t k = 0; k < m; ++k) {
      jac(c, u_index(c, k, C)) = f.h[k];
      const double uck = theta[u_index(c, k, C)];
      for (std::size_t j = 0; j < p; ++j) {
        jac(c, v_index(j, k, C, p, m)) = uck * example.x[j];
      }
    }
  }
  // S = diag(p) - p p^T
  linalg::Matrix s(C, C);
  for (std::size_t c1 = 0; c1 < C; ++c1) {
    for (std::size_t c2 = 0; c2 < C; ++c2) {
      s(c1, c2) = ((c1 == c2) ? f.probs[c1] : 0.0) - f.probs[c1] * f.probs[c2];
    }
  }
  return jac.transposed() * (s * jac);
}

linalg::Matrix NllToyModel::example_residual(std::span<const double> theta,
                                             const NllExample& example) const {
  if (theta.size() != parameter_dim()) {
    throw ArgumentError("example_residual: theta dimension mismatch");
  }
  const std::size_t C = n_classes_, p = n_features_, m = factor_rank_;
  const Forward f = forward_pass(theta, example, C, p, m);
  std::vector<double> delta(f.probs);
  delta[example.label] -= 1.0;

  // the only curvature of z_c in theta is d2 z_c / dU(c,k) dV(j,k) = x_j
  linalg::Matrix r(parameter_dim(), parameter_dim());
  for (std::size_t c = 0; c < C; ++c) {
    if (delta[c] == 0.0) continue;
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t ui = u_index(c, k, C);
      for (std::size_t j = 0; j < p; ++j) {
        const std::size_t vi = v_index(j, k, C, p, m);
        const double val = delta[c] * example.x[j];
        r(ui, vi) += val;
        r(vi, ui) += val;
      }
    }
  }
  return r;
}

linalg::Matrix NllToyModel::example_hessian(std::span<const double> theta,
                                            const NllExample& example) const {
  return example_fisher(theta, example) + example_residual(theta, example);
}

double NllToyModel::mean_loss(std::span<const double> theta,
                              std::span<const NllExample> examples) const {
  if (examples.empty()) {
    throw ArgumentError("mean_loss: empty example set");
  }
  double acc = 0.0;
  for (const auto& e : examples) acc += example_loss(theta, e);
  return acc / static_cast<double>(examples.size());
}

std::vector<double> NllToyModel::mean_gradient(std::span<const double> theta,
                                               std::span<const NllExample> examples) const {
  if (examples.empty()) {
    throw ArgumentError("mean_gradient: empty example set");
  }
  std::vector<double> acc(parameter_dim(), 0.0);
  for (const auto& e : examples) {
    const auto g = example_gradient(theta, e);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
  }
  const double inv = 1.0 / static_cast<double>(examples.size());
  for (double& v : acc) v *= inv;
  return acc;
}

namespace {

template <typename F>
linalg::Matrix mean_matrix(std::span<const NllExample> examples, std::size_t d, F&& per_example) {
  if (examples.empty()) {
    throw ArgumentError("mean over empty example set");
  }
  linalg::Matrix acc(d, d);
  for (const auto& e : examples) {
    const linalg::Matrix m = per_example(e);
    for (std::size_t i = 0; i < d * d; ++i) acc.data()[i] += m.data()[i];
  }
  const double inv = 1.0 / static_cast<double>(examples.size());
  for (std::size_t i = 0; i < d * d; ++i) acc.data()[i] *= inv;
  return acc;
}

}  // namespace

linalg::Matrix NllToyModel::mean_hessian(std::span<const double> theta,
                                         std::span<const NllExample> examples) const {
  return mean_matrix(examples, parameter_dim(),
                     [&](const NllExample& e) { return example_hessian(theta, e); });
}

linalg::Matrix NllToyModel::mean_fisher(std::span<const double> theta,
                                        std::span<const NllExample> examples) const {
  return mean_matrix(examples, parameter_dim(),
                     [&](const NllExample& e) { return example_fisher(theta, e); });
}

linalg::Matrix NllToyModel::mean_residual(std::span<const double> theta,
                                          std::span<const NllExample> examples) const {
  return mean_matrix(examples, parameter_dim(),
                     [&](const NllExample& e) { return example_residual(theta, e); });
}

std::vector<double> NllToyModel::random_theta(std::size_t dim, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> theta(dim);
  for (double& t : theta) t = scale * normal(rng);
  return theta;
}

AdamParams warmup_defaults() {
  AdamParams params;
  params.base_lr = 0.05;
  return params;
}

TrainResult adam_train(const NllToyModel& model, std::span<const double> theta0,
                       std::span<const NllExample> examples, std::size_t epochs,
                       const AdamParams& params, std::uint64_t seed) {
  TrainResult result;
  result.theta.assign(theta0.begin(), theta0.end());
  if (examples.empty() || epochs == 0) {
    return result;
  }
  std::mt19937_64 rng(seed);
  AdamState state = AdamState::init(model.parameter_dim(), params);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      const NllExample& e = examples[idx];
      const double loss = model.example_loss(result.theta, e);
      if (!std::isfinite(loss)) {
        throw DivergenceError("adam_train: non-finite loss at step " + std::to_string(step));
      }
      result.losses.push_back(loss);
      auto out = adam_step(state, result.theta, model.example_gradient(result.theta, e));
      result.theta = std::move(out.theta);
      state = std::move(out.state);
      ++step;
    }
  }
  return result;
}

TrainResult warmup_train(const NllToyModel& model, std::span<const double> theta0,
                         double warmup_fraction, std::size_t epochs, std::uint64_t seed,
                         const AdamParams& params) {
  if (warmup_fraction <= 0.0 || warmup_fraction > 1.0) {
    throw ArgumentError("warmup_train: warmup_fraction must lie in (0, 1]");
  }
  const auto& pool = model.dataset();
  if (pool.empty()) {
    throw ArgumentError("warmup_train: model has no dataset");
  }
  const std::size_t take = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(warmup_fraction * static_cast<double>(pool.size()))));

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(take, order.size()));
  std::sort(order.begin(), order.end());

  std::vector<NllExample> subset;
  subset.reserve(order.size());
  for (std::size_t idx : order) subset.push_back(pool[idx]);

  TrainResult result = adam_train(model, theta0, subset, epochs, params, rng());
  result.subset = std::move(order);
  return result;
}

NllToyModel make_spectrum_instance(std::uint64_t seed, std::size_t n_examples,
                                   std::size_t n_classes, std::size_t n_features,
                                   std::size_t factor_rank) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_class(0, n_classes - 1);

  std::vector<std::vector<double>> centers(n_classes, std::vector<double>(n_features));
  for (auto& c : centers) {
    for (double& v : c) v = 1.5 * normal(rng);
  }
  std::vector<NllExample> data;
  data.reserve(n_examples);
  for (std::size_t i = 0; i < n_examples; ++i) {
    NllExample e;
    e.label = pick_class(rng);
    e.x.resize(n_features);
    for (std::size_t j = 0; j < n_features; ++j) {
      e.x[j] = centers[e.label][j] + 0.4 * normal(rng);
    }
    data.push_back(std::move(e));
  }
  return NllToyModel(n_classes, n_features, factor_rank, std::move(data));
}

TargetedTask make_targeted_task(std::uint64_t seed, const TargetedTaskOptions& options) {
  if (options.n_features % 2 != 0) {
    throw ArgumentError("make_targeted_task: n_features must be even (two blocks)");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_class(0, options.n_classes - 1);
  const std::size_t half = options.n_features / 2;

  // class centers for the on-task block and unrelated centers for the
  // off-task block
  std::vector<std::vector<double>> on_centers(options.n_classes, std::vector<double>(half));
  std::vector<std::vector<double>> off_centers(options.n_classes, std::vector<double>(half));
  for (auto& c : on_centers) {
    for (double& v : c) v = 2.0 * normal(rng);
  }
  for (auto& c : off_centers) {
    for (double& v : c) v = 2.0 * normal(rng);
  }

  auto draw_on = [&]() {
    NllExample e;
    e.label = pick_class(rng);
    e.x.assign(options.n_features, 0.0);
    for (std::size_t j = 0; j < half; ++j) {
      e.x[j] = on_centers[e.label][j] + options.cluster_noise * normal(rng);
      e.x[half + j] = options.leak_noise * normal(rng);
    }
    return e;
  };
  auto draw_foreign = [&]() {
    NllExample e;
    const std::size_t cluster = pick_class(rng);
    e.label = pick_class(rng);  // labels detached from the cluster: a foreign task
    e.x.assign(options.n_features, 0.0);
    for (std::size_t j = 0; j < half; ++j) {
      e.x[j] = options.leak_noise * normal(rng);
      e.x[half + j] = off_centers[cluster][j] + options.cluster_noise * normal(rng);
    }
    return e;
  };
  auto draw_mislabeled = [&]() {
    NllExample e = draw_on();
    const std::size_t true_label = e.label;
    // deliberately wrong label: gradients oppose the target directions
    e.label = (true_label + 1 + rng() % (options.n_classes - 1)) % options.n_classes;
    return e;
  };

  TargetedTask task{NllToyModel(options.n_classes, options.n_features, options.factor_rank, {}),
                    {}, {}, {}, {}};
  std::vector<NllExample> pool;
  std::vector<std::string> ids;
  pool.reserve(options.n_on + options.n_off);
  for (std::size_t i = 0; i < options.n_on; ++i) {
    pool.push_back(draw_on());
    ids.push_back("on:" + std::to_string(i));
  }
  const std::size_t n_mislabeled =
      static_cast<std::size_t>(options.mislabeled_fraction * static_cast<double>(options.n_off));
  for (std::size_t i = 0; i < options.n_off; ++i) {
    if (i < n_mislabeled) {
      pool.push_back(draw_mislabeled());
      ids.push_back("noisy:" + std::to_string(i));
    } else {
      pool.push_back(draw_foreign());
      ids.push_back("off:" + std::to_string(i));
    }
  }
  // deterministic shuffle so on/off examples interleave in manifest order
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<NllExample> shuffled;
  std::vector<std::string> shuffled_ids;
  shuffled.reserve(pool.size());
  for (std::size_t idx : order) {
    shuffled.push_back(std::move(pool[idx]));
    shuffled_ids.push_back(std::move(ids[idx]));
  }

  task.model = NllToyModel(options.n_classes, options.n_features, options.factor_rank,
                           std::move(shuffled));
  task.candidate_ids = std::move(shuffled_ids);
  for (std::size_t i = 0; i < options.n_val; ++i) {
    task.val_set.push_back(draw_on());
    task.val_ids.push_back("val:" + std::to_string(i));
  }
  task.theta0 = NllToyModel::random_theta(task.model.parameter_dim(), rng());
  return task;
}

}  // namespace gist::oracle
