// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: targeted data selection over gradient feature
// files (spectrum / select / per-direction), toy-model generation and the
// verification lab (gen-toy / verify / toy-optim).

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gist/cli.hpp"
#include "gist/errors.hpp"
#include "gist/kernels.hpp"

namespace {

gist::spectral::RankPolicy add_policy_flags(CLI::App* cmd, double& threshold,
                                            std::size_t& fewshot, std::int64_t& max_rank) {
  cmd->add_option("--variance-threshold", threshold,
                  "cumulative explained-variance cutoff for the rank choice");
  cmd->add_option("--fewshot-below", fewshot,
                  "keep full rank when the target pool is smaller than this");
  cmd->add_option("--max-rank", max_rank, "optional hard cap on the rank (-1: none)");
  return {};
}

gist::spectral::RankPolicy make_policy(double threshold, std::size_t fewshot,
                                       std::int64_t max_rank) {
  gist::spectral::RankPolicy policy;
  policy.variance_threshold = threshold;
  policy.fewshot_full_rank_below = fewshot;
  if (max_rank >= 0) policy.max_rank = static_cast<std::size_t>(max_rank);
  return policy;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"targeted data selection via gradient-subspace alignment"};
  app.require_subcommand(1);

  // ---- select ------------------------------------------------------------
  std::string config_path;
  gist::cli::RunConfig run;
  std::string aggregation = "max";
  double sel_threshold = 0.95;
  std::size_t sel_fewshot = 16;
  std::int64_t sel_max_rank = -1;
  bool have_targets = false, have_candidates = false, have_out = false;

  auto* select = app.add_subcommand("select", "score candidates and pick the top-k subset");
  select->add_option("--config", config_path, "JSON run configuration (flags override it)");
  auto* opt_targets = select->add_option("--targets", run.target_features, "target feature file");
  auto* opt_candidates =
      select->add_option("--candidates", run.candidate_features, "candidate feature file");
  auto* opt_out = select->add_option("--out", run.output_dir, "output directory");
  select->add_option("--budget", run.budget, "selection budget k");
  select->add_option("--chunk-rows", run.chunk_rows, "rows per streamed chunk");
  select->add_option("--workers", run.workers, "parallel scoring workers");
  select->add_option("--seed", run.seed, "run seed (recorded for replay)");
  select->add_option("--aggregation", aggregation, "max (default) or mean");
  select->add_flag("--write-pairwise", run.write_pairwise,
                   "also write the full pairwise score matrix");
  add_policy_flags(select, sel_threshold, sel_fewshot, sel_max_rank);

  // ---- spectrum ----------------------------------------------------------
  gist::cli::SpectrumArgs spectrum;
  double spec_threshold = 0.95;
  std::size_t spec_fewshot = 16;
  std::int64_t spec_max_rank = -1;
  auto* spectrum_cmd =
      app.add_subcommand("spectrum", "singular spectrum and chosen rank of a target pool");
  spectrum_cmd->add_option("--targets", spectrum.target_features, "target feature file")
      ->required();
  spectrum_cmd->add_option("--out", spectrum.output_dir, "output directory")->required();
  add_policy_flags(spectrum_cmd, spec_threshold, spec_fewshot, spec_max_rank);

  // ---- gen-toy -----------------------------------------------------------
  gist::cli::GenToyArgs gen;
  std::string kind = "nll";
  auto* gen_cmd = app.add_subcommand("gen-toy", "generate desk-scale pools from a toy model");
  gen_cmd->add_option("--kind", kind, "quadratic | lora | nll")
      ->check(CLI::IsMember({"quadratic", "lora", "nll"}));
  gen_cmd->add_option("--seed", gen.seed, "generator seed");
  gen_cmd->add_option("--out", gen.output_dir, "output directory")->required();
  gen_cmd->add_option("--n-val", gen.n_val, "validation pool size (nll)");
  gen_cmd->add_option("--n-candidates", gen.n_candidates, "candidate pool size (nll)");
  gen_cmd->add_option("--warmup-epochs", gen.warmup_epochs, "warmup epochs before the snapshot");
  gen_cmd->add_option("--warmup-fraction", gen.warmup_fraction, "fraction of the pool to warm on");

  // ---- verify ------------------------------------------------------------
  gist::cli::VerifyArgs verify;
  std::string suite = "all";
  auto* verify_cmd = app.add_subcommand("verify", "run the theorem verification suites");
  verify_cmd->add_option("--suite", suite, "t1 | t2 | t3 | toy-geometry | all")
      ->check(CLI::IsMember({"t1", "t2", "t3", "toy-geometry", "all"}));
  verify_cmd->add_option("--seeds", verify.seeds, "instance count override (0: default)");
  verify_cmd->add_option("--out", verify.output_dir, "output directory")->required();

  // ---- toy-optim ---------------------------------------------------------
  gist::cli::ToyOptimArgs toy;
  std::string landscape = "coupled";
  std::string optimizer = "adam";
  auto* toy_cmd = app.add_subcommand("toy-optim", "2D optimizer trajectories on toy quadratics");
  toy_cmd->add_option("--landscape", landscape, "diag | coupled")
      ->check(CLI::IsMember({"diag", "coupled"}));
  toy_cmd->add_option("--optimizer", optimizer, "newton | adam | gd")
      ->check(CLI::IsMember({"newton", "adam", "gd"}));
  toy_cmd->add_option("--steps", toy.steps, "number of optimizer steps");
  toy_cmd->add_option("--newton-lr", toy.newton_lr, "newton step size");
  toy_cmd->add_option("--gd-lr", toy.gd_lr, "gradient descent step size");
  toy_cmd->add_option("--adam-lr", toy.adam_lr, "adam initial learning rate (linear decay)");
  toy_cmd->add_option("--theta0", toy.theta0, "starting point (two values)")->expected(2);
  toy_cmd->add_option("--out", toy.output_dir, "output directory")->required();

  // ---- per-direction -----------------------------------------------------
  gist::cli::PerDirectionArgs direction;
  double dir_threshold = 0.95;
  std::size_t dir_fewshot = 16;
  std::int64_t dir_max_rank = -1;
  auto* dir_cmd =
      app.add_subcommand("per-direction", "top candidates along one principal direction");
  dir_cmd->add_option("--targets", direction.target_features, "target feature file")->required();
  dir_cmd->add_option("--candidates", direction.candidate_features, "candidate feature file")
      ->required();
  dir_cmd->add_option("--direction", direction.direction, "1-based principal direction");
  dir_cmd->add_option("--top", direction.top_m, "how many candidates to keep");
  dir_cmd->add_option("--chunk-rows", direction.chunk_rows, "rows per streamed chunk");
  dir_cmd->add_option("--out", direction.output_dir, "output directory")->required();
  add_policy_flags(dir_cmd, dir_threshold, dir_fewshot, dir_max_rank);

  CLI11_PARSE(app, argc, argv);

  try {
    if (select->parsed()) {
      gist::cli::RunConfig config;
      if (!config_path.empty()) {
        config = gist::cli::RunConfig::from_json_file(config_path);
      }
      have_targets = opt_targets->count() > 0;
      have_candidates = opt_candidates->count() > 0;
      have_out = opt_out->count() > 0;
      if (have_targets) config.target_features = run.target_features;
      if (have_candidates) config.candidate_features = run.candidate_features;
      if (have_out) config.output_dir = run.output_dir;
      if (select->count("--budget")) config.budget = run.budget;
      if (select->count("--chunk-rows")) config.chunk_rows = run.chunk_rows;
      if (select->count("--workers")) config.workers = run.workers;
      if (select->count("--seed")) config.seed = run.seed;
      if (select->count("--write-pairwise")) config.write_pairwise = run.write_pairwise;
      if (select->count("--aggregation")) {
        if (aggregation != "max" && aggregation != "mean") {
          throw gist::ArgumentError("aggregation must be 'max' or 'mean'");
        }
        config.aggregation = aggregation == "max" ? gist::scoring::Aggregation::max
                                                  : gist::scoring::Aggregation::mean;
      }
      if (select->count("--variance-threshold")) {
        config.rank_policy.variance_threshold = sel_threshold;
      }
      if (select->count("--fewshot-below")) {
        config.rank_policy.fewshot_full_rank_below = sel_fewshot;
      }
      if (select->count("--max-rank") && sel_max_rank >= 0) {
        config.rank_policy.max_rank = static_cast<std::size_t>(sel_max_rank);
      }
      return gist::cli::run_select(config, std::cout);
    }
    if (spectrum_cmd->parsed()) {
      spectrum.rank_policy = make_policy(spec_threshold, spec_fewshot, spec_max_rank);
      return gist::cli::run_spectrum(spectrum, std::cout);
    }
    if (gen_cmd->parsed()) {
      gen.kind = kind == "quadratic" ? gist::cli::ToyKind::quadratic
                 : kind == "lora"    ? gist::cli::ToyKind::lora
                                     : gist::cli::ToyKind::nll;
      return gist::cli::run_gen_toy(gen, std::cout);
    }
    if (verify_cmd->parsed()) {
      verify.suite = suite == "t1"             ? gist::cli::VerifySuite::t1
                     : suite == "t2"           ? gist::cli::VerifySuite::t2
                     : suite == "t3"           ? gist::cli::VerifySuite::t3
                     : suite == "toy-geometry" ? gist::cli::VerifySuite::toy_geometry
                                               : gist::cli::VerifySuite::all;
      return gist::cli::run_verify(verify, std::cout);
    }
    if (toy_cmd->parsed()) {
      toy.landscape = landscape == "diag" ? gist::cli::ToyLandscape::diag
                                          : gist::cli::ToyLandscape::coupled;
      toy.optimizer = optimizer == "newton" ? gist::oracle::Optimizer::newton
                      : optimizer == "gd"   ? gist::oracle::Optimizer::gd
                                            : gist::oracle::Optimizer::adam;
      return gist::cli::run_toy_optim(toy, std::cout);
    }
    if (dir_cmd->parsed()) {
      direction.rank_policy = make_policy(dir_threshold, dir_fewshot, dir_max_rank);
      return gist::cli::run_per_direction(direction, std::cout);
    }
  } catch (const gist::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
