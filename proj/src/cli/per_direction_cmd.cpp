// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <ostream>
#include <sstream>

#include "cli/cli_detail.hpp"
#include "gist/cli.hpp"
#include "gist/errors.hpp"
#include "gist/gradstore.hpp"

namespace gist::cli {

int run_per_direction(const PerDirectionArgs& args, std::ostream& out) {
  detail::ensure_dir(args.output_dir);

  const auto targets = gradstore::read_features(args.target_features);
  const auto build = spectral::build_projector(targets, args.rank_policy);
  auto stream = gradstore::stream_chunks(args.candidate_features, args.chunk_rows);
  const auto hits =
      scoring::per_direction_top(stream, build.projector, args.direction, args.top_m);

  std::ostringstream csv;
  csv << "rank,candidate_id,score\n";
  char buf[64];
  for (std::size_t i = 0; i < hits.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", hits[i].score);
    csv << (i + 1) << ',' << hits[i].id << ',' << buf << '\n';
  }
  detail::write_text(args.output_dir / "per_direction.csv", csv.str());

  nlohmann::json config;
  config["target_features"] = args.target_features.string();
  config["candidate_features"] = args.candidate_features.string();
  config["rank_policy"] = detail::rank_policy_json(args.rank_policy);
  config["direction"] = args.direction;
  config["top_m"] = args.top_m;
  config["chunk_rows"] = args.chunk_rows;
  config["output_dir"] = args.output_dir.string();
  detail::write_text(args.output_dir / "resolved_config.json", config.dump(2) + "\n");

  out << "direction " << args.direction << ": kept " << hits.size() << " candidates\n";
  return 0;
}

}  // namespace gist::cli
