// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>

#include <nlohmann/json.hpp>

#include "gist/cli.hpp"
#include "gist/errors.hpp"

namespace gist::cli {

namespace {

nlohmann::json policy_to_json(const spectral::RankPolicy& policy) {
  nlohmann::json j;
  j["variance_threshold"] = policy.variance_threshold;
  j["fewshot_full_rank_below"] = policy.fewshot_full_rank_below;
  if (policy.max_rank) {
    j["max_rank"] = *policy.max_rank;
  } else {
    j["max_rank"] = nullptr;
  }
  return j;
}

spectral::RankPolicy policy_from_json(const nlohmann::json& j) {
  spectral::RankPolicy policy;
  if (j.contains("variance_threshold")) policy.variance_threshold = j["variance_threshold"];
  if (j.contains("fewshot_full_rank_below")) {
    policy.fewshot_full_rank_below = j["fewshot_full_rank_below"];
  }
  if (j.contains("max_rank") && !j["max_rank"].is_null()) {
    policy.max_rank = j["max_rank"].get<std::size_t>();
  }
  return policy;
}

}  // namespace

void RunConfig::validate() const {
  if (chunk_rows < 1) {
    throw ArgumentError("config: chunk_rows must be >= 1");
  }
  if (workers < 1) {
    throw ArgumentError("config: workers must be >= 1");
  }
  if (rank_policy.variance_threshold <= 0.0 || rank_policy.variance_threshold > 1.0) {
    throw ArgumentError("config: variance_threshold must lie in (0, 1]");
  }
  if (target_features.empty() || candidate_features.empty()) {
    throw ArgumentError("config: target and candidate feature paths are required");
  }
  if (output_dir.empty()) {
    throw ArgumentError("config: output_dir is required");
  }
}

RunConfig RunConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config " + path.string());
  }
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw FormatError("config " + path.string() + " is not valid JSON");
  }
  RunConfig config;
  if (j.contains("target_features")) config.target_features = j["target_features"].get<std::string>();
  if (j.contains("candidate_features")) {
    config.candidate_features = j["candidate_features"].get<std::string>();
  }
  if (j.contains("output_dir")) config.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("rank_policy")) config.rank_policy = policy_from_json(j["rank_policy"]);
  if (j.contains("budget")) config.budget = j["budget"];
  if (j.contains("chunk_rows")) config.chunk_rows = j["chunk_rows"];
  if (j.contains("workers")) config.workers = j["workers"];
  if (j.contains("seed")) config.seed = j["seed"];
  if (j.contains("write_pairwise")) config.write_pairwise = j["write_pairwise"];
  if (j.contains("aggregation")) {
    const std::string agg = j["aggregation"];
    if (agg == "max") {
      config.aggregation = scoring::Aggregation::max;
    } else if (agg == "mean") {
      config.aggregation = scoring::Aggregation::mean;
    } else {
      throw ArgumentError("config: aggregation must be 'max' or 'mean'");
    }
  }
  return config;
}

std::string RunConfig::to_json() const {
  nlohmann::json j;
  j["target_features"] = target_features.string();
  j["candidate_features"] = candidate_features.string();
  j["output_dir"] = output_dir.string();
  j["rank_policy"] = policy_to_json(rank_policy);
  j["budget"] = budget;
  j["chunk_rows"] = chunk_rows;
  j["workers"] = workers;
  j["seed"] = seed;
  j["aggregation"] = aggregation == scoring::Aggregation::max ? "max" : "mean";
  j["write_pairwise"] = write_pairwise;
  return j.dump(2) + "\n";
}

namespace detail {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string());
  }
  out << text;
  out.flush();
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  }
}

nlohmann::json rank_policy_json(const spectral::RankPolicy& policy) {
  return policy_to_json(policy);
}

}  // namespace detail

}  // namespace gist::cli
