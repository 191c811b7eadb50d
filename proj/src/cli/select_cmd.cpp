// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include <ostream>

#include "cli/cli_detail.hpp"
#include "gist/cli.hpp"
#include "gist/errors.hpp"
#include "gist/gradstore.hpp"

namespace gist::cli {

int run_select(const RunConfig& config, std::ostream& out) {
  config.validate();
  detail::ensure_dir(config.output_dir);

  const auto targets = gradstore::read_features(config.target_features);
  auto build = spectral::build_projector(targets, config.rank_policy);
  const auto targets_projected = spectral::project(build.projector, targets);

  auto stream = gradstore::stream_chunks(config.candidate_features, config.chunk_rows);
  scoring::ScoreOptions options;
  options.aggregation = config.aggregation;
  options.workers = config.workers;
  const auto table = scoring::score_pool(stream, targets_projected, targets.example_ids(),
                                         build.projector, options);
  const auto selection = scoring::select_topk(table, config.budget);

  scoring::write_scores_csv(table, config.output_dir / "scores.csv");
  scoring::write_selection_json(selection, targets.checkpoint_tag(),
                                config.output_dir / "selection.json");
  if (config.write_pairwise) {
    scoring::write_pairwise_features(table, config.output_dir / "pairwise.feat");
  }
  detail::write_text(config.output_dir / "resolved_config.json", config.to_json());

  out << "selected " << selection.selected_ids.size() << " of " << table.n_candidates
      << " candidates (rank " << build.projector.rank() << ")\n";
  return 0;
}

}  // namespace gist::cli
