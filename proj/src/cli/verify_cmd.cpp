// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "cli/cli_detail.hpp"
#include "gist/cli.hpp"
#include "gist/errors.hpp"
#include "gist/oracle/influence.hpp"
#include "gist/oracle/lora.hpp"
#include "gist/oracle/nll.hpp"
#include "gist/oracle/quadratic.hpp"

namespace gist::cli {

namespace {

void push(SuiteReport& report, double margin) {
  report.margins.push_back(margin);
  ++report.instances;
  if (margin >= 0.0) ++report.pass_count;
}

void finish(SuiteReport& report) {
  report.worst_margin = report.margins.empty()
                            ? 0.0
                            : *std::min_element(report.margins.begin(), report.margins.end());
}

// central second difference of the composed adapter loss, the independent
// route against which the curvature formula is checked
double fd_adapter_entry(const oracle::LoraModel& model, std::size_t k, std::size_t j1,
                        std::size_t j2) {
  const double h1 = 1e-4 * (1.0 + std::abs(model.a(k, j1)));
  const double h2 = 1e-4 * (1.0 + std::abs(model.a(k, j2)));
  auto loss_at = [&](double d1, double d2) {
    linalg::Matrix a = model.a;
    a(k, j1) += d1;
    a(k, j2) += d2;
    return model.loss_with_a(a);
  };
  if (j1 == j2) {
    return (loss_at(h1, 0.0) - 2.0 * loss_at(0.0, 0.0) + loss_at(-h1, 0.0)) / (h1 * h1);
  }
  return (loss_at(h1, h2) - loss_at(h1, -h2) - loss_at(-h1, h2) + loss_at(-h1, -h2)) /
         (4.0 * h1 * h2);
}

double spearman_rank(const std::vector<double>& a, const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < v.size()) {
      std::size_t j = i;
      while (j + 1 < v.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double mean = (static_cast<double>(a.size()) + 1.0) / 2.0;
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (ra[i] - mean) * (rb[i] - mean);
    da += (ra[i] - mean) * (ra[i] - mean);
    db += (rb[i] - mean) * (rb[i] - mean);
  }
  return num / std::sqrt(da * db);
}

linalg::Matrix random_psd(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(lo, hi);
  // orthonormalize a random square matrix, then recombine with a drawn spectrum
  linalg::Matrix q(n, n);
  for (std::size_t i = 0; i < n * n; ++i) q.data()[i] = normal(rng);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t prev = 0; prev < j; ++prev) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += q(i, j) * q(i, prev);
      for (std::size_t i = 0; i < n; ++i) q(i, j) -= dot * q(i, prev);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += q(i, j) * q(i, j);
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) q(i, j) /= norm;
  }
  std::vector<double> lambda(n);
  for (auto& l : lambda) l = unif(rng);
  linalg::Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += q(i, k) * lambda[k] * q(j, k);
      m(i, j) = acc;
      m(j, i) = acc;
    }
  }
  return m;
}

}  // namespace

SuiteReport verify_toy_geometry() {
  SuiteReport report;
  report.theorem = "toy-geometry";

  const auto coupled = oracle::QuadraticLandscape::coupled_example();
  const std::vector<double> theta0 = {-2.5, 0.0};

  const auto after_newton = oracle::newton_step(coupled, theta0, 1.0);
  const double dist = std::hypot(after_newton[0], after_newton[1]);
  push(report, 1e-10 - dist);

  const auto newton_traj = oracle::run_trajectory(coupled, oracle::Optimizer::newton, theta0, 1, {});
  push(report, 1e-18 - newton_traj.points.back().loss);

  oracle::TrajectoryOptions options;
  options.adam = oracle::AdamState::toy_defaults(2).params;
  const auto adam_coupled =
      oracle::run_trajectory(coupled, oracle::Optimizer::adam, theta0, 45, options);
  push(report, adam_coupled.points.back().loss - newton_traj.points.back().loss - 1e-18);

  const auto adam_diag = oracle::run_trajectory(oracle::QuadraticLandscape::axis_aligned_example(),
                                                oracle::Optimizer::adam, theta0, 45, options);
  push(report, adam_coupled.points.back().loss - adam_diag.points.back().loss);

  const auto eig = linalg::eigh(coupled.hessian);
  push(report, 1e-9 - std::max(std::abs(eig.values[0] - 20.0), std::abs(eig.values[1] - 1.0)));

  const auto floor = oracle::diagonal_floor(0.5);
  push(report, 1e-15 - std::abs(floor.minimized - floor.analytic_floor));

  finish(report);
  return report;
}

SuiteReport verify_theorem1(std::size_t instances) {
  SuiteReport report;
  report.theorem = "t1";
  if (instances == 0) instances = 200;

  // factorization: magnitude-magnitude-cosine reproduces g_val^T H^+ g
  std::mt19937_64 rng(191);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t trial = 0; trial < instances; ++trial) {
    const std::size_t d = 3 + rng() % 10;
    const auto h = random_psd(rng, d, 0.0, 5.0);
    std::vector<double> g_val(d), g_cand(d);
    for (auto& v : g_val) v = normal(rng);
    for (auto& v : g_cand) v = normal(rng);
    const double influence = oracle::influence_score(g_val, h, g_cand);
    const auto decomp = oracle::decompose_utility(g_val, g_cand, h);
    const double rel =
        std::abs(decomp.product() - influence) / std::max(std::abs(influence), 1.0);
    push(report, 1e-9 - rel);
  }

  // rank agreement of predicted vs actual one-step validation deltas
  const auto model = oracle::make_spectrum_instance(4242, 10, 3, 6, 2);
  const auto warm = oracle::warmup_train(
      model, oracle::NllToyModel::random_theta(model.parameter_dim(), 4243), 1.0, 1, 4244);
  const auto hessian = model.mean_hessian(warm.theta, model.dataset());
  const auto eig = linalg::eigh(hessian);
  const auto g_val = model.mean_gradient(warm.theta, model.dataset());
  const double before = model.mean_loss(warm.theta, model.dataset());
  std::mt19937_64 cand_rng(4245);
  std::uniform_int_distribution<std::size_t> pick_class(0, 2);
  std::vector<double> predicted, actual;
  for (int i = 0; i < 200; ++i) {
    oracle::NllExample candidate;
    candidate.label = pick_class(cand_rng);
    candidate.x.resize(model.n_features());
    for (auto& v : candidate.x) v = normal(cand_rng);
    const auto g_c = model.example_gradient(warm.theta, candidate);
    predicted.push_back(-1e-3 * oracle::influence_score(g_val, eig, g_c));
    const auto direction = eig.apply_pinv(g_c, oracle::kPinvRelCutoff);
    auto moved = warm.theta;
    for (std::size_t j = 0; j < moved.size(); ++j) moved[j] -= 1e-3 * direction[j];
    actual.push_back(model.mean_loss(moved, model.dataset()) - before);
  }
  push(report, spearman_rank(predicted, actual) - 0.9);

  finish(report);
  return report;
}

SuiteReport verify_theorem2(std::size_t models) {
  SuiteReport report;
  report.theorem = "t2";
  if (models == 0) models = 100;

  std::mt19937_64 rng(292);
  for (std::size_t trial = 0; trial < models; ++trial) {
    const std::size_t d_out = 2 + rng() % 5;  // dims <= 6
    const std::size_t d_in = 2 + rng() % 5;
    const std::size_t rank = 1 + rng() % 3;
    const auto model = oracle::LoraModel::random(rng(), d_out, d_in, rank, /*coupled=*/true);

    double worst_rel = 0.0;
    double best_offdiag = 0.0;
    for (std::size_t k = 0; k < rank; ++k) {
      for (std::size_t j1 = 0; j1 < d_in; ++j1) {
        for (std::size_t j2 = 0; j2 < d_in; ++j2) {
          const double formula = oracle::lora_hessian_entry(model, k, j1, j2);
          const double fd = fd_adapter_entry(model, k, j1, j2);
          worst_rel = std::max(worst_rel,
                               std::abs(formula - fd) / std::max(std::abs(formula), 1.0));
          if (j1 != j2) best_offdiag = std::max(best_offdiag, std::abs(formula));
        }
      }
    }
    push(report, std::min(1e-4 - worst_rel, best_offdiag - 1e-6));
  }
  finish(report);
  return report;
}

SuiteReport verify_theorem3(std::size_t instances) {
  SuiteReport report;
  report.theorem = "t3";
  if (instances == 0) instances = 20;

  for (std::uint64_t seed = 0; seed < instances; ++seed) {
    const auto model = oracle::make_spectrum_instance(7000 + seed, 12, 3, 6, 2);
    const auto warm = oracle::warmup_train(
        model, oracle::NllToyModel::random_theta(model.parameter_dim(), 7100 + seed), 1.0, 1,
        seed);
    const auto result = oracle::theorem3_end_to_end(model, warm.theta, model.dataset(), 2);
    if (result.degenerate) {
      ++report.instances;
      ++report.skipped;
      continue;
    }
    push(report, result.bound_rhs - result.sin_theta);
  }

  // an injected rank-deficient instance must be skipped, not failed
  {
    const auto base = oracle::make_spectrum_instance(7777, 1, 3, 6, 2);
    std::vector<oracle::NllExample> repeated(6, base.dataset()[0]);
    const oracle::NllToyModel degenerate(3, 6, 2, std::move(repeated));
    const auto theta = oracle::NllToyModel::random_theta(degenerate.parameter_dim(), 7778);
    const auto result =
        oracle::theorem3_end_to_end(degenerate, theta, degenerate.dataset(), 2);
    ++report.instances;
    if (result.degenerate) {
      ++report.skipped;
    } else {
      push(report, result.bound_rhs - result.sin_theta);
      --report.instances;  // push() already counted it
    }
  }

  // generic Davis-Kahan verification: random PSD reference with a unit gap,
  // perturbation of spectral norm 0.1
  std::mt19937_64 rng(393);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst_dk = std::numeric_limits<double>::infinity();
  bool all_hold = true;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t d = 8 + rng() % 5;
    const std::size_t r = 2 + rng() % 3;
    linalg::Matrix b = random_psd(rng, d, 0.0, 1.5);
    {
      // lift the leading block to guarantee a gap >= 1 at rank r
      const auto eig = linalg::eigh(b);
      linalg::Matrix lifted(d, d);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
          double acc = 0.0;
          for (std::size_t k = 0; k < d; ++k) {
            const double lambda = eig.values[k] + (k < r ? 2.5 : 0.0);
            acc += eig.vectors(i, k) * lambda * eig.vectors(j, k);
          }
          lifted(i, j) = acc;
          lifted(j, i) = acc;
        }
      }
      b = std::move(lifted);
    }
    linalg::Matrix e(d, d);
    for (std::size_t i = 0; i < d * d; ++i) e.data()[i] = normal(rng);
    e = linalg::symmetrize(e);
    const double norm = linalg::spectral_norm_sym(e);
    for (std::size_t i = 0; i < d * d; ++i) e.data()[i] *= 0.1 / norm;

    const auto check = spectral::davis_kahan_bound_check(b + e, b, r);
    worst_dk = std::min(worst_dk, check.rhs + 1e-9 - check.lhs);
    all_hold = all_hold && check.holds;
  }
  push(report, all_hold ? worst_dk : std::min(worst_dk, -1.0));

  finish(report);
  return report;
}

int run_verify(const VerifyArgs& args, std::ostream& out) {
  detail::ensure_dir(args.output_dir);

  std::vector<SuiteReport> reports;
  const auto want = [&](VerifySuite suite) {
    return args.suite == VerifySuite::all || args.suite == suite;
  };
  if (want(VerifySuite::toy_geometry)) reports.push_back(verify_toy_geometry());
  if (want(VerifySuite::t1)) reports.push_back(verify_theorem1(args.seeds));
  if (want(VerifySuite::t2)) reports.push_back(verify_theorem2(args.seeds));
  if (want(VerifySuite::t3)) reports.push_back(verify_theorem3(args.seeds));

  bool all_passed = true;
  nlohmann::json suites = nlohmann::json::array();
  for (const auto& report : reports) {
    nlohmann::json j;
    j["theorem"] = report.theorem;
    j["instances"] = report.instances;
    j["pass_count"] = report.pass_count;
    j["skipped"] = report.skipped;
    j["worst_margin"] = report.worst_margin;
    j["margins"] = report.margins;
    suites.push_back(std::move(j));
    all_passed = all_passed && report.passed();
    out << (report.passed() ? "[PASS] " : "[FAIL] ") << report.theorem << ": "
        << report.pass_count << "/" << report.instances - report.skipped << " checks";
    if (report.skipped > 0) out << " (" << report.skipped << " skipped)";
    out << ", worst margin " << report.worst_margin << "\n";
  }
  nlohmann::json doc;
  doc["suites"] = std::move(suites);
  doc["all_passed"] = all_passed;
  detail::write_text(args.output_dir / "report.json", doc.dump(2) + "\n");

  nlohmann::json config;
  config["suite"] = args.suite == VerifySuite::all          ? "all"
                    : args.suite == VerifySuite::t1         ? "t1"
                    : args.suite == VerifySuite::t2         ? "t2"
                    : args.suite == VerifySuite::t3         ? "t3"
                                                            : "toy-geometry";
  config["seeds"] = args.seeds;
  config["output_dir"] = args.output_dir.string();
  detail::write_text(args.output_dir / "resolved_config.json", config.dump(2) + "\n");

  return all_passed ? 0 : 1;
}

}  // namespace gist::cli
