// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gist/oracle/quadratic.hpp"
#include "gist/scoring.hpp"
#include "gist/spectral.hpp"

// Batch front end: each command resolves its configuration, writes its data
// artifacts plus a resolved_config.json replay file into the output
// directory, and keeps stdout for one-line summaries. Exit codes: 0 iff all
// validations and assertions passed.

namespace gist::cli {

struct RunConfig {
  std::filesystem::path target_features;
  std::filesystem::path candidate_features;
  std::filesystem::path output_dir;
  spectral::RankPolicy rank_policy;
  std::size_t budget = 0;
  std::size_t chunk_rows = 1024;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  scoring::Aggregation aggregation = scoring::Aggregation::max;
  bool write_pairwise = false;

  /// Throws ArgumentError when invariants (budget >= 0 is free, chunk_rows
  /// >= 1, workers >= 1, threshold in (0,1]) do not hold.
  void validate() const;

  static RunConfig from_json_file(const std::filesystem::path& path);
  std::string to_json() const;
};

/// selection.json + scores.csv (+ pairwise.feat) + resolved_config.json.
int run_select(const RunConfig& config, std::ostream& out);

struct SpectrumArgs {
  std::filesystem::path target_features;
  spectral::RankPolicy rank_policy;
  std::filesystem::path output_dir;
};

/// spectrum.csv + rank.json + projector.gproj + resolved_config.json; prints
/// the chosen rank with the policy branch taken.
int run_spectrum(const SpectrumArgs& args, std::ostream& out);

enum class ToyKind { quadratic, lora, nll };

struct GenToyArgs {
  ToyKind kind = ToyKind::nll;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  // nll pool sizes (quadratic/lora use their own small defaults)
  std::size_t n_val = 9;
  std::size_t n_candidates = 400;
  std::size_t warmup_epochs = 1;
  double warmup_fraction = 0.05;
};

/// targets.feat + candidates.feat + ground_truth.json + resolved_config.json.
int run_gen_toy(const GenToyArgs& args, std::ostream& out);

enum class VerifySuite { t1, t2, t3, toy_geometry, all };

struct VerifyArgs {
  VerifySuite suite = VerifySuite::all;
  std::size_t seeds = 0;  // 0: per-suite default
  std::filesystem::path output_dir;
};

struct SuiteReport {
  std::string theorem;
  std::size_t instances = 0;
  std::size_t pass_count = 0;
  std::size_t skipped = 0;
  double worst_margin = 0.0;      // min over instance margins (>= 0 passes)
  std::vector<double> margins;    // one per non-skipped instance

  bool passed() const { return pass_count + skipped == instances; }
};

// Individual suites, reusable from the acceptance harness.
SuiteReport verify_toy_geometry();
SuiteReport verify_theorem1(std::size_t instances);      // influence factorization + prediction
SuiteReport verify_theorem2(std::size_t models);         // curvature formula vs finite differences
SuiteReport verify_theorem3(std::size_t instances);      // subspace stability + generic Davis-Kahan

/// report.json + resolved_config.json; one summary line per suite.
int run_verify(const VerifyArgs& args, std::ostream& out);

enum class ToyLandscape { diag, coupled };

struct ToyOptimArgs {
  ToyLandscape landscape = ToyLandscape::coupled;
  oracle::Optimizer optimizer = oracle::Optimizer::adam;
  std::size_t steps = 45;
  double newton_lr = 1.0;
  double gd_lr = 0.04;
  double adam_lr = 0.25;
  std::vector<double> theta0 = {-2.5, 0.0};
  std::filesystem::path output_dir;
};

/// trajectory.csv + resolved_config.json.
int run_toy_optim(const ToyOptimArgs& args, std::ostream& out);

struct PerDirectionArgs {
  std::filesystem::path target_features;
  std::filesystem::path candidate_features;
  spectral::RankPolicy rank_policy;
  std::size_t direction = 1;  // 1-based principal direction
  std::size_t top_m = 10;
  std::size_t chunk_rows = 1024;
  std::filesystem::path output_dir;
};

/// per_direction.csv + resolved_config.json.
int run_per_direction(const PerDirectionArgs& args, std::ostream& out);

}  // namespace gist::cli
