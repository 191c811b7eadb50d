// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gist/gradstore.hpp"
#include "gist/linalg.hpp"
#include "gist/spectral.hpp"

// Candidate scoring by projected-gradient cosine against every target,
// max-relevance aggregation and deterministic top-k selection.
//
// A gradient orthogonal to the task subspace has no defined cosine; such
// entries carry a sentinel that ranks below every real score (below -1).

namespace gist::scoring {

/// Sentinel for undefined zero-projection cosines. Real scores live in
/// [-1, 1], so the sentinel orders strictly below all of them.
inline constexpr double kSentinelScore = -2.0;

inline bool is_sentinel(double score) { return score == kSentinelScore; }

/// Scale-aware norm floor: 1e-12 * sqrt(r).
double default_zero_tolerance(std::size_t rank);

/// Cosine of two projected vectors, or the sentinel when either norm is
/// at or below zero_tolerance. Results are clamped to [-1, 1].
double cosine_in_subspace(std::span<const double> projected_a, std::span<const double> projected_b,
                          double zero_tolerance);

/// Maximum over non-sentinel entries; all-sentinel rows yield the sentinel.
double aggregate_max(std::span<const double> pairwise_row);

enum class Aggregation {
  max,   // FinalScore = max_j Sim (the default)
  mean,  // ablation only: mean over non-sentinel entries
};

struct ScoreTable {
  std::size_t n_candidates = 0;
  std::size_t n_targets = 0;
  std::vector<double> pairwise;         // n_candidates x n_targets, row-major
  std::vector<double> final_scores;     // length n_candidates
  std::vector<std::int64_t> argmax_target;  // index of best target, -1 for sentinel rows
  std::vector<std::string> candidate_ids;
  std::vector<std::string> target_ids;
  std::string checkpoint_tag;

  double at(std::size_t candidate, std::size_t target) const {
    return pairwise[candidate * n_targets + target];
  }
};

struct ScoreOptions {
  Aggregation aggregation = Aggregation::max;
  std::size_t workers = 1;
  /// Negative means: use default_zero_tolerance(rank).
  double zero_tolerance = -1.0;
};

/// Projects each candidate chunk, fills the pairwise cosine table and the
/// aggregated final scores. Row order always matches the candidate manifest
/// order, independent of chunking and worker count.
ScoreTable score_pool(gradstore::ChunkStream& candidates, const linalg::Matrix& targets_projected,
                      const std::vector<std::string>& target_ids,
                      const spectral::TargetProjector& projector, const ScoreOptions& options = {});

struct SelectionResult {
  std::vector<std::string> selected_ids;       // best first
  std::vector<double> scores;                  // non-increasing (sentinels last)
  std::vector<std::string> argmax_targets;     // empty string for sentinel rows
  std::size_t budget = 0;
  std::string tie_break_note;
};

/// Top-k by final score; ties break by ascending candidate index. Keeps a
/// bounded selection structure rather than sorting the whole pool.
SelectionResult select_topk(const ScoreTable& table, std::size_t k);

struct DirectionHit {
  std::string id;
  double score = 0.0;
  std::size_t index = 0;
};

/// Top-m candidates ranked by |<g, v_direction>| / ||g||; direction_index is
/// 1-based as in the spectrum report.
std::vector<DirectionHit> per_direction_top(gradstore::ChunkStream& candidates,
                                            const spectral::TargetProjector& projector,
                                            std::size_t direction_index, std::size_t m);

/// CSV columns: candidate_id, final_score, argmax_target_id. Sentinel rows
/// print "undefined" with an empty target.
void write_scores_csv(const ScoreTable& table, const std::filesystem::path& path);

/// JSON {budget, checkpoint_tag, selected: [{id, score, argmax_target}]};
/// sentinel scores serialize as null.
void write_selection_json(const SelectionResult& result, const std::string& checkpoint_tag,
                          const std::filesystem::path& path);

/// Full pairwise matrix in the feature-file format (sentinels stored as -2).
void write_pairwise_features(const ScoreTable& table, const std::filesystem::path& path);

}  // namespace gist::scoring
