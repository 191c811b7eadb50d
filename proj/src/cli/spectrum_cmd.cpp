// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include <ostream>

#include "cli/cli_detail.hpp"
#include "gist/cli.hpp"
#include "gist/errors.hpp"
#include "gist/gradstore.hpp"

namespace gist::cli {

int run_spectrum(const SpectrumArgs& args, std::ostream& out) {
  detail::ensure_dir(args.output_dir);
  const auto targets = gradstore::read_features(args.target_features);
  if (targets.rows() == 0) {
    throw ArgumentError("spectrum: target file is empty");
  }
  const auto build = spectral::build_projector(targets, args.rank_policy);

  spectral::write_spectrum_csv(build.spectrum, args.output_dir / "spectrum.csv");
  spectral::write_projector(build.projector, args.output_dir / "projector.gproj");

  const bool fewshot = build.branch == spectral::RankBranch::fewshot_full_rank;
  nlohmann::json rank_doc;
  rank_doc["rank"] = build.projector.rank();
  rank_doc["branch"] = fewshot ? "fewshot_full_rank" : "variance_threshold";
  rank_doc["numerical_rank"] = build.numerical_rank;
  rank_doc["n_targets"] = targets.rows();
  detail::write_text(args.output_dir / "rank.json", rank_doc.dump(2) + "\n");

  nlohmann::json config;
  config["target_features"] = args.target_features.string();
  config["output_dir"] = args.output_dir.string();
  config["rank_policy"] = detail::rank_policy_json(args.rank_policy);
  detail::write_text(args.output_dir / "resolved_config.json", config.dump(2) + "\n");

  if (fewshot) {
    out << "few-shot override, r=" << build.projector.rank() << "\n";
  } else {
    out << "variance threshold, r=" << build.projector.rank() << "\n";
  }
  return 0;
}

}  // namespace gist::cli
