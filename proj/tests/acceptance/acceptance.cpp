// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance harness: every release criterion, one pass/fail line each.
// Exit code = number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gist/cli.hpp"
#include "gist/errors.hpp"
#include "gist/gradstore.hpp"
#include "gist/kernels.hpp"
#include "gist/oracle/influence.hpp"
#include "gist/oracle/nll.hpp"
#include "gist/oracle/quadratic.hpp"
#include "gist/scoring.hpp"
#include "gist/spectral.hpp"
#include "support/test_oracles.hpp"

namespace fs = std::filesystem;
using namespace gist;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "gist_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- criterion 1: toy geometry ------------------------------------------

Outcome criterion_toy_geometry() {
  const auto report = cli::verify_toy_geometry();
  Outcome out;
  out.pass = report.passed();
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%zu/%zu geometry checks, worst margin %.3g",
                report.pass_count, report.instances, report.worst_margin);
  out.detail = buf;
  return out;
}

// ---- criterion 2: lora curvature ----------------------------------------

Outcome criterion_theorem2() {
  const auto report = cli::verify_theorem2(100);
  Outcome out;
  out.pass = report.passed();
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%zu/%zu models within 1e-4 of finite differences",
                report.pass_count, report.instances);
  out.detail = buf;
  return out;
}

// ---- criterion 3: subspace stability -------------------------------------

Outcome criterion_theorem3() {
  const auto report = cli::verify_theorem3(20);
  Outcome out;
  out.pass = report.passed();
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%zu/%zu bound checks (%zu degenerate skipped), worst margin %.3g",
                report.pass_count, report.instances - report.skipped, report.skipped,
                report.worst_margin);
  out.detail = buf;
  return out;
}

// ---- criterion 4: influence factorization + prediction -------------------

Outcome criterion_theorem1() {
  const auto report = cli::verify_theorem1(200);
  Outcome out;
  out.pass = report.passed();
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%zu/%zu factorization+prediction checks, worst margin %.3g",
                report.pass_count, report.instances, report.worst_margin);
  out.detail = buf;
  return out;
}

// ---- criterion 5: spectral correctness ------------------------------------

Outcome criterion_spectral() {
  std::mt19937_64 rng(5050);
  std::size_t matrices = 0, angle_failures = 0, tail_failures = 0, idem_failures = 0;

  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 31;                 // n <= 32
    const std::size_t d = n + 1 + rng() % (256 - n);      // d <= 256
    const auto targets = testing::random_gradient_matrix(rng(), n, d, "acc5");
    spectral::RankPolicy policy;
    policy.fewshot_full_rank_below = 0;
    policy.variance_threshold = 1.0;  // keep the full numerical rank
    const auto build = spectral::build_projector(targets, policy);
    ++matrices;

    // dense one-sided Jacobi SVD as the independent oracle
    linalg::Matrix g(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) g(i, j) = static_cast<double>(targets.row(i)[j]);
    }
    const auto oracle_svd = testing::dense_svd(g);
    const double sigma1 = oracle_svd.singular_values[0];

    // principal angles per non-degenerate cluster
    const std::size_t r = build.projector.rank();
    std::size_t begin = 0;
    while (begin < r) {
      std::size_t end = begin + 1;
      while (end < r && (oracle_svd.singular_values[end - 1] - oracle_svd.singular_values[end]) <
                            spectral::kDegenerateClusterRel * sigma1) {
        ++end;
      }
      if (end <= r) {
        const std::size_t width = end - begin;
        linalg::Matrix a(d, width), b(d, width);
        for (std::size_t j = 0; j < width; ++j) {
          for (std::size_t i = 0; i < d; ++i) {
            a(i, j) = build.projector.column(begin + j)[i];
            b(i, j) = oracle_svd.right_vectors(i, begin + j);
          }
        }
        const auto angles = spectral::principal_angles(a, b);
        for (double angle : angles.principal_angles) {
          if (angle > 1e-6) ++angle_failures;
        }
      }
      begin = end;
    }

    // Eckart-Young tail identity at every rank
    double total_energy = 0.0;
    for (double s : oracle_svd.singular_values) total_energy += s * s;
    for (std::size_t rank = 1; rank <= build.numerical_rank; ++rank) {
      const double err = spectral::reconstruction_error(build.projector.truncated(rank), targets);
      double tail = 0.0;
      for (std::size_t i = rank; i < oracle_svd.singular_values.size(); ++i) {
        tail += oracle_svd.singular_values[i] * oracle_svd.singular_values[i];
      }
      if (std::abs(err - tail) > 1e-8 * tail + 1e-12 * total_energy) ++tail_failures;
    }

    // projector idempotence and symmetry, entrywise 1e-8
    const auto v = build.projector.basis_matrix();
    linalg::Matrix p(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < r; ++k) acc += v(i, k) * v(j, k);
        p(i, j) = acc;
      }
    }
    const auto pp = p * p;
    for (std::size_t i = 0; i < d && idem_failures == 0; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        if (std::abs(pp(i, j) - p(i, j)) > 1e-8 || std::abs(p(i, j) - p(j, i)) > 1e-8) {
          ++idem_failures;
          break;
        }
      }
    }
  }

  Outcome out;
  out.pass = angle_failures == 0 && tail_failures == 0 && idem_failures == 0;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "%zu matrices: %zu angle, %zu tail-sum, %zu idempotence violations", matrices,
                angle_failures, tail_failures, idem_failures);
  out.detail = buf;
  return out;
}

// ---- criterion 6: pipeline determinism + dense reference -----------------

struct ReferenceSelection {
  std::vector<std::string> ids;
  std::vector<double> scores;
  std::vector<double> finals;  // per-candidate, manifest order
};

ReferenceSelection dense_reference(const gradstore::GradientMatrix& targets,
                                   const gradstore::GradientMatrix& candidates,
                                   std::size_t budget) {
  // unchunked, single-threaded, full-sort reference
  const auto build = spectral::build_projector(targets, spectral::RankPolicy{});
  const auto targets_projected = spectral::project(build.projector, targets);
  const auto cands_projected = spectral::project(build.projector, candidates);
  const std::size_t r = build.projector.rank();
  const double zero_tol = scoring::default_zero_tolerance(r);

  std::vector<std::vector<double>> t_rows(targets.rows());
  for (std::size_t j = 0; j < targets.rows(); ++j) {
    t_rows[j].assign(targets_projected.row(j), targets_projected.row(j) + r);
  }

  ReferenceSelection ref;
  ref.finals.resize(candidates.rows());
  for (std::size_t i = 0; i < candidates.rows(); ++i) {
    std::vector<double> c(cands_projected.row(i), cands_projected.row(i) + r);
    std::vector<double> row(targets.rows());
    for (std::size_t j = 0; j < targets.rows(); ++j) {
      row[j] = scoring::cosine_in_subspace(c, t_rows[j], zero_tol);
    }
    ref.finals[i] = scoring::aggregate_max(row);
  }

  std::vector<std::size_t> order(candidates.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (ref.finals[a] != ref.finals[b]) return ref.finals[a] > ref.finals[b];
    return a < b;
  });
  const std::size_t keep = std::min(budget, candidates.rows());
  for (std::size_t i = 0; i < keep; ++i) {
    ref.ids.push_back(candidates.example_ids()[order[i]]);
    ref.scores.push_back(ref.finals[order[i]]);
  }
  return ref;
}

Outcome criterion_pipeline_determinism() {
  const fs::path dir = work_dir() / "pipeline";
  fs::create_directories(dir);

  const std::size_t n_candidates = 10000, n_targets = 300, d = 512, budget = 500;
  const auto targets = testing::random_gradient_matrix(601, n_targets, d, "acc6");
  const auto candidates = testing::random_gradient_matrix(602, n_candidates, d, "acc6");
  gradstore::write_features(targets, dir / "targets.feat");
  gradstore::write_features(candidates, dir / "candidates.feat");

  const auto reference = dense_reference(targets, candidates, budget);

  std::string baseline_scores, baseline_selection;
  std::size_t runs = 0, byte_mismatches = 0;
  for (std::size_t workers : {1, 4, 8}) {
    for (std::size_t chunk : {1, 64, 4096}) {
      cli::RunConfig config;
      config.target_features = dir / "targets.feat";
      config.candidate_features = dir / "candidates.feat";
      config.output_dir = dir / ("run_w" + std::to_string(workers) + "_c" + std::to_string(chunk));
      config.budget = budget;
      config.chunk_rows = chunk;
      config.workers = workers;
      std::ostringstream sink;
      cli::run_select(config, sink);
      ++runs;

      const auto scores = read_bytes(config.output_dir / "scores.csv");
      const auto selection = read_bytes(config.output_dir / "selection.json");
      if (baseline_scores.empty()) {
        baseline_scores = scores;
        baseline_selection = selection;
      } else if (scores != baseline_scores || selection != baseline_selection) {
        ++byte_mismatches;
      }
    }
  }

  // parse the baseline csv and compare against the dense reference exactly
  std::size_t value_mismatches = 0;
  {
    std::istringstream in(baseline_scores);
    std::string line;
    std::getline(in, line);  // header
    std::size_t row = 0;
    while (std::getline(in, line)) {
      const auto c1 = line.find(',');
      const auto c2 = line.find(',', c1 + 1);
      const std::string id = line.substr(0, c1);
      const double score = std::strtod(line.substr(c1 + 1, c2 - c1 - 1).c_str(), nullptr);
      if (id != candidates.example_ids()[row] || score != reference.finals[row]) {
        ++value_mismatches;
      }
      ++row;
    }
    if (row != n_candidates) ++value_mismatches;
  }
  {
    std::ifstream in(dir / "run_w1_c1" / "selection.json");
    nlohmann::json doc = nlohmann::json::parse(in);
    const auto& selected = doc["selected"];
    if (selected.size() != reference.ids.size()) {
      ++value_mismatches;
    } else {
      for (std::size_t i = 0; i < reference.ids.size(); ++i) {
        if (selected[i]["id"] != reference.ids[i] ||
            selected[i]["score"].get<double>() != reference.scores[i]) {
          ++value_mismatches;
        }
      }
    }
  }

  Outcome out;
  out.pass = byte_mismatches == 0 && value_mismatches == 0;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "%zu runs byte-identical (%zu mismatches), dense-reference mismatches %zu "
                "[kernels: %s]",
                runs, byte_mismatches, value_mismatches,
                std::string(kernels::isa_name(kernels::active_isa())).c_str());
  out.detail = buf;
  return out;
}

// ---- criterion 7: selection benefit ---------------------------------------

struct BenchmarkCounts {
  std::size_t beats_random = 0;
  std::size_t beats_gradnorm = 0;
  std::size_t seeds = 0;
};

double train_and_eval(const oracle::NllToyModel& model, const std::vector<double>& theta0,
                      const std::vector<oracle::NllExample>& subset,
                      const std::vector<oracle::NllExample>& val_set, std::uint64_t seed) {
  oracle::AdamParams params;
  params.base_lr = 0.05;
  const auto trained = oracle::adam_train(model, theta0, subset, 2, params, seed);
  return model.mean_loss(trained.theta, val_set);
}

BenchmarkCounts run_selection_benchmark(std::size_t seeds) {
  BenchmarkCounts counts;
  counts.seeds = seeds;
  const fs::path dir = work_dir() / "benchmark";
  fs::create_directories(dir);

  for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
    const auto task = oracle::make_targeted_task(seed);
    const auto& pool = task.model.dataset();
    const std::size_t budget = pool.size() / 20;  // the 5% budget

    const auto warm = oracle::warmup_train(task.model, task.theta0, 0.05, 1, seed);
    const auto& theta_t = warm.theta;

    // gradient features at the warmup checkpoint, through the real store
    const std::size_t d = task.model.parameter_dim();
    auto to_matrix = [&](std::span<const oracle::NllExample> examples,
                         const std::vector<std::string>& ids) {
      std::vector<float> values(examples.size() * d);
      for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto g = task.model.example_gradient(theta_t, examples[i]);
        for (std::size_t j = 0; j < d; ++j) values[i * d + j] = static_cast<float>(g[j]);
      }
      return gradstore::GradientMatrix(examples.size(), d, std::move(values), ids, "bench");
    };
    const auto target_matrix = to_matrix(task.val_set, task.val_ids);
    const auto candidate_matrix = to_matrix(pool, task.candidate_ids);
    const auto candidates_path = dir / ("cand_" + std::to_string(seed) + ".feat");
    gradstore::write_features(candidate_matrix, candidates_path);

    const auto build = spectral::build_projector(target_matrix, spectral::RankPolicy{});
    const auto targets_projected = spectral::project(build.projector, target_matrix);
    auto stream = gradstore::stream_chunks(candidates_path, 64);
    const auto table =
        scoring::score_pool(stream, targets_projected, task.val_ids, build.projector, {});
    const auto selection = scoring::select_topk(table, budget);

    // id -> pool index
    auto subset_from_ids = [&](const std::vector<std::string>& ids) {
      std::vector<oracle::NllExample> subset;
      for (const auto& id : ids) {
        const auto it = std::find(task.candidate_ids.begin(), task.candidate_ids.end(), id);
        subset.push_back(pool[static_cast<std::size_t>(it - task.candidate_ids.begin())]);
      }
      return subset;
    };
    const auto gist_subset = subset_from_ids(selection.selected_ids);

    // random baseline
    std::vector<std::size_t> indices(pool.size());
    std::iota(indices.begin(), indices.end(), 0);
    std::mt19937_64 rng(seed ^ 0x5eedULL);
    std::shuffle(indices.begin(), indices.end(), rng);
    std::vector<oracle::NllExample> random_subset;
    for (std::size_t i = 0; i < budget; ++i) random_subset.push_back(pool[indices[i]]);

    // gradient-norm baseline (raw norm, descending)
    std::vector<std::pair<double, std::size_t>> norms;
    for (std::size_t i = 0; i < candidate_matrix.rows(); ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        acc += static_cast<double>(candidate_matrix.row(i)[j]) * candidate_matrix.row(i)[j];
      }
      norms.emplace_back(acc, i);
    }
    std::sort(norms.begin(), norms.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    std::vector<oracle::NllExample> gradnorm_subset;
    for (std::size_t i = 0; i < budget; ++i) gradnorm_subset.push_back(pool[norms[i].second]);

    const double gist_loss =
        train_and_eval(task.model, task.theta0, gist_subset, task.val_set, 1000 + seed);
    const double random_loss =
        train_and_eval(task.model, task.theta0, random_subset, task.val_set, 1000 + seed);
    const double gradnorm_loss =
        train_and_eval(task.model, task.theta0, gradnorm_subset, task.val_set, 1000 + seed);

    if (gist_loss < random_loss) ++counts.beats_random;
    if (gist_loss < gradnorm_loss) ++counts.beats_gradnorm;
  }
  return counts;
}

Outcome criterion_selection_benefit() {
  const auto counts = run_selection_benchmark(20);
  Outcome out;
  out.pass = counts.beats_random >= 18 && counts.beats_gradnorm >= 15;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "beats random %zu/20 (need 18), beats gradient-norm %zu/20 (need 15)",
                counts.beats_random, counts.beats_gradnorm);
  out.detail = buf;
  return out;
}

// ---- criterion 8: format robustness ---------------------------------------

Outcome criterion_format_robustness() {
  const fs::path dir = work_dir() / "format";
  fs::create_directories(dir);
  std::mt19937_64 rng(808);
  std::size_t roundtrips = 0, failures = 0;

  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t rows = rng() % 30;
    const std::size_t dim = 1 + rng() % 48;
    const auto m = testing::random_gradient_matrix(rng(), rows, dim, "fmt");
    const auto path = dir / "roundtrip.feat";
    gradstore::write_features(m, path);
    const auto back = gradstore::read_features(path);
    ++roundtrips;
    if (back.values() != m.values() || back.example_ids() != m.example_ids() ||
        back.checkpoint_tag() != m.checkpoint_tag()) {
      ++failures;
    }
  }

  // corrupted header and truncated payload must fail with the right classes
  bool classes_ok = true;
  const auto m = testing::random_gradient_matrix(9, 6, 8, "fmt");
  const auto good = dir / "good.feat";
  gradstore::write_features(m, good);

  const auto bad_magic = dir / "bad_magic.feat";
  fs::copy_file(good, bad_magic, fs::copy_options::overwrite_existing);
  {
    std::fstream f(bad_magic, std::ios::in | std::ios::out | std::ios::binary);
    f.write("WRONGMAG", 8);
  }
  fs::copy_file(good.string() + ".manifest.jsonl", bad_magic.string() + ".manifest.jsonl",
                fs::copy_options::overwrite_existing);
  try {
    gradstore::read_features(bad_magic);
    classes_ok = false;
  } catch (const FormatError&) {
  } catch (...) {
    classes_ok = false;
  }

  const auto truncated = dir / "truncated.feat";
  fs::copy_file(good, truncated, fs::copy_options::overwrite_existing);
  fs::resize_file(truncated, fs::file_size(truncated) - 7);
  fs::copy_file(good.string() + ".manifest.jsonl", truncated.string() + ".manifest.jsonl",
                fs::copy_options::overwrite_existing);
  try {
    gradstore::read_features(truncated);
    classes_ok = false;
  } catch (const CorruptionError&) {
  } catch (...) {
    classes_ok = false;
  }

  Outcome out;
  out.pass = failures == 0 && classes_ok;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%zu/%zu round-trips exact, error classes %s", roundtrips - failures,
                roundtrips, classes_ok ? "correct" : "WRONG");
  out.detail = buf;
  return out;
}

struct Criterion {
  int number;
  const char* name;
  double budget_seconds;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);

  const Criterion criteria[] = {
      {1, "toy geometry reproduction", 1.0, criterion_toy_geometry},
      {2, "lora curvature vs finite differences", 10.0, criterion_theorem2},
      {3, "subspace stability bound", 30.0, criterion_theorem3},
      {4, "influence factorization and prediction", 30.0, criterion_theorem1},
      {5, "spectral correctness vs dense SVD", 20.0, criterion_spectral},
      {6, "pipeline determinism and oracle equivalence", 60.0, criterion_pipeline_determinism},
      {7, "end-to-end selection benefit", 120.0, criterion_selection_benefit},
      {8, "format robustness", 5.0, criterion_format_robustness},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    if (only != 0 && only != criterion.number) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = seconds <= criterion.budget_seconds;
    const bool pass = outcome.pass && in_budget;
    if (!pass) ++failures;
    std::printf("[%s] %d. %s: %s (%.2fs, budget %.0fs)\n", pass ? "PASS" : "FAIL",
                criterion.number, criterion.name, outcome.detail.c_str(), seconds,
                criterion.budget_seconds);
    std::fflush(stdout);
  }
  return failures;
}
