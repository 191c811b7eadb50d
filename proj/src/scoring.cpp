// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include "gist/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "gist/errors.hpp"
#include "gist/kernels.hpp"

namespace gist::scoring {

double default_zero_tolerance(std::size_t rank) {
  return 1e-12 * std::sqrt(static_cast<double>(rank));
}

double cosine_in_subspace(std::span<const double> projected_a, std::span<const double> projected_b,
                          double zero_tolerance) {
  if (projected_a.size() != projected_b.size()) {
    throw ArgumentError("cosine_in_subspace: projected vectors differ in length");
  }
  if (projected_a.empty()) {
    throw ArgumentError("cosine_in_subspace: empty vectors");
  }
  const double na =
      std::sqrt(kernels::dot_dd(projected_a.data(), projected_a.data(), projected_a.size()));
  const double nb =
      std::sqrt(kernels::dot_dd(projected_b.data(), projected_b.data(), projected_b.size()));
  if (na <= zero_tolerance || nb <= zero_tolerance) {
    return kSentinelScore;
  }
  const double cos =
      kernels::dot_dd(projected_a.data(), projected_b.data(), projected_a.size()) / (na * nb);
  return std::clamp(cos, -1.0, 1.0);
}

double aggregate_max(std::span<const double> pairwise_row) {
  if (pairwise_row.empty()) {
    throw ArgumentError("aggregate_max: empty row");
  }
  double best = kSentinelScore;
  for (double s : pairwise_row) {
    if (!is_sentinel(s) && (is_sentinel(best) || s > best)) {
      best = s;
    }
  }
  return best;
}

namespace {

struct RowAggregate {
  double final_score;
  std::int64_t argmax;
};

RowAggregate aggregate_row(std::span<const double> row, Aggregation mode) {
  std::int64_t argmax = -1;
  double best = kSentinelScore;
  double sum = 0.0;
  std::size_t real = 0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    const double s = row[j];
    if (is_sentinel(s)) continue;
    if (argmax < 0 || s > best) {
      best = s;
      argmax = static_cast<std::int64_t>(j);
    }
    sum += s;
    ++real;
  }
  if (argmax < 0) {
    return {kSentinelScore, -1};
  }
  if (mode == Aggregation::mean) {
    return {sum / static_cast<double>(real), argmax};
  }
  return {best, argmax};
}

}  // namespace

ScoreTable score_pool(gradstore::ChunkStream& candidates, const linalg::Matrix& targets_projected,
                      const std::vector<std::string>& target_ids,
                      const spectral::TargetProjector& projector, const ScoreOptions& options) {
  const std::size_t n_targets = targets_projected.rows();
  const std::size_t rank = projector.rank();
  if (n_targets == 0) {
    throw ArgumentError("score_pool: empty target set");
  }
  if (target_ids.size() != n_targets) {
    throw ArgumentError("score_pool: one id per target row required");
  }
  if (targets_projected.cols() != rank) {
    throw ArgumentError("score_pool: projected targets do not match projector rank");
  }
  if (candidates.header().dim != projector.dim()) {
    throw ArgumentError("score_pool: candidate dim does not match projector");
  }
  const double zero_tol =
      options.zero_tolerance < 0.0 ? default_zero_tolerance(rank) : options.zero_tolerance;

  // Target norms up front; zero-projection targets yield sentinel columns.
  // Each pairwise entry divides by the product of norms, exactly as
  // cosine_in_subspace does, so chunked scoring is bit-identical to a dense
  // pair-by-pair recomputation.
  std::vector<double> target_norm(n_targets);
  std::vector<bool> target_defined(n_targets);
  for (std::size_t j = 0; j < n_targets; ++j) {
    const double* row = targets_projected.row(j);
    target_norm[j] = std::sqrt(kernels::dot_dd(row, row, rank));
    target_defined[j] = target_norm[j] > zero_tol;
  }

  const std::size_t n_candidates = candidates.header().n_rows;
  ScoreTable table;
  table.n_candidates = n_candidates;
  table.n_targets = n_targets;
  table.pairwise.assign(n_candidates * n_targets, kSentinelScore);
  table.final_scores.assign(n_candidates, kSentinelScore);
  table.argmax_target.assign(n_candidates, -1);
  table.candidate_ids.assign(n_candidates, std::string());
  table.target_ids = target_ids;
  table.checkpoint_tag = candidates.header().checkpoint_tag;

  std::mutex stream_mutex;
  auto worker = [&]() {
    std::vector<double> coords(rank);
    for (;;) {
      std::optional<gradstore::ChunkStream::Chunk> chunk;
      {
        std::lock_guard<std::mutex> lock(stream_mutex);
        chunk = candidates.next();
      }
      if (!chunk) break;
      const auto& m = chunk->matrix;
      for (std::size_t i = 0; i < m.rows(); ++i) {
        const std::size_t global = chunk->first_row + i;
        table.candidate_ids[global] = m.example_ids()[i];
        spectral::project_row(projector, m.row(i), coords.data());
        const double norm = std::sqrt(kernels::dot_dd(coords.data(), coords.data(), rank));
        double* out_row = table.pairwise.data() + global * n_targets;
        if (norm > zero_tol) {
          for (std::size_t j = 0; j < n_targets; ++j) {
            if (!target_defined[j]) continue;
            const double cos = kernels::dot_dd(coords.data(), targets_projected.row(j), rank) /
                               (norm * target_norm[j]);
            out_row[j] = std::clamp(cos, -1.0, 1.0);
          }
        }
        const RowAggregate agg =
            aggregate_row({out_row, n_targets}, options.aggregation);
        table.final_scores[global] = agg.final_score;
        table.argmax_target[global] = agg.argmax;
      }
    }
  };

  const std::size_t n_workers = std::max<std::size_t>(options.workers, 1);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
      pool.emplace_back(worker);
    }
    for (auto& t : pool) {
      t.join();
    }
  }
  return table;
}

namespace {

// strict total order: higher score first, then lower candidate index
bool better(double score_a, std::size_t idx_a, double score_b, std::size_t idx_b) {
  if (score_a != score_b) return score_a > score_b;
  return idx_a < idx_b;
}

}  // namespace

SelectionResult select_topk(const ScoreTable& table, std::size_t k) {
  struct Entry {
    double score;
    std::size_t index;
  };
  // min-heap on the selection order: the root is the weakest kept entry
  auto worse = [](const Entry& a, const Entry& b) {
    return better(a.score, a.index, b.score, b.index);
  };
  std::vector<Entry> heap;
  const std::size_t keep = std::min(k, table.n_candidates);
  heap.reserve(keep + 1);
  for (std::size_t i = 0; i < table.n_candidates; ++i) {
    const Entry e{table.final_scores[i], i};
    if (heap.size() < keep) {
      heap.push_back(e);
      std::push_heap(heap.begin(), heap.end(), worse);
    } else if (keep > 0 && better(e.score, e.index, heap.front().score, heap.front().index)) {
      std::pop_heap(heap.begin(), heap.end(), worse);
      heap.back() = e;
      std::push_heap(heap.begin(), heap.end(), worse);
    }
  }
  std::sort(heap.begin(), heap.end(),
            [](const Entry& a, const Entry& b) { return better(a.score, a.index, b.score, b.index); });

  SelectionResult result;
  result.budget = k;
  result.tie_break_note = "ties broken by ascending candidate manifest index";
  result.selected_ids.reserve(heap.size());
  result.scores.reserve(heap.size());
  result.argmax_targets.reserve(heap.size());
  for (const Entry& e : heap) {
    result.selected_ids.push_back(table.candidate_ids[e.index]);
    result.scores.push_back(e.score);
    const std::int64_t arg = table.argmax_target[e.index];
    result.argmax_targets.push_back(arg >= 0 ? table.target_ids[static_cast<std::size_t>(arg)]
                                             : std::string());
  }
  return result;
}

std::vector<DirectionHit> per_direction_top(gradstore::ChunkStream& candidates,
                                            const spectral::TargetProjector& projector,
                                            std::size_t direction_index, std::size_t m) {
  if (direction_index == 0 || direction_index > projector.rank()) {
    throw ArgumentError("per_direction_top: direction index out of range");
  }
  if (candidates.header().dim != projector.dim()) {
    throw ArgumentError("per_direction_top: candidate dim does not match projector");
  }
  const double* direction = projector.column(direction_index - 1);
  const std::size_t d = projector.dim();

  struct Entry {
    double score;
    std::size_t index;
    std::string id;
  };
  auto is_better = [](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  };
  std::vector<Entry> heap;
  heap.reserve(m + 1);

  while (auto chunk = candidates.next()) {
    const auto& mat = chunk->matrix;
    for (std::size_t i = 0; i < mat.rows(); ++i) {
      const float* row = mat.row(i);
      const double norm_sq = kernels::dot_ff(row, row, d);
      if (norm_sq <= 0.0) continue;  // zero gradients have no direction
      const double score =
          std::clamp(std::abs(kernels::dot_fd(row, direction, d)) / std::sqrt(norm_sq), 0.0, 1.0);
      const Entry e{score, chunk->first_row + i, mat.example_ids()[i]};
      if (heap.size() < m) {
        heap.push_back(e);
        std::push_heap(heap.begin(), heap.end(), is_better);
      } else if (m > 0 && is_better(e, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), is_better);
        heap.back() = e;
        std::push_heap(heap.begin(), heap.end(), is_better);
      }
    }
  }
  std::sort(heap.begin(), heap.end(), is_better);

  std::vector<DirectionHit> hits;
  hits.reserve(heap.size());
  for (auto& e : heap) {
    hits.push_back({std::move(e.id), e.score, e.index});
  }
  return hits;
}

void write_scores_csv(const ScoreTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("write_scores_csv: cannot open " + path.string());
  }
  out << "candidate_id,final_score,argmax_target_id\n";
  char buf[64];
  for (std::size_t i = 0; i < table.n_candidates; ++i) {
    const double score = table.final_scores[i];
    out << table.candidate_ids[i] << ',';
    if (is_sentinel(score)) {
      out << "undefined,";
    } else {
      std::snprintf(buf, sizeof(buf), "%.17g", score);
      out << buf << ',';
    }
    const std::int64_t arg = table.argmax_target[i];
    if (arg >= 0) {
      out << table.target_ids[static_cast<std::size_t>(arg)];
    }
    out << '\n';
  }
  out.flush();
  if (!out) {
    throw IoError("write_scores_csv: write failed for " + path.string());
  }
}

void write_selection_json(const SelectionResult& result, const std::string& checkpoint_tag,
                          const std::filesystem::path& path) {
  nlohmann::json selected = nlohmann::json::array();
  for (std::size_t i = 0; i < result.selected_ids.size(); ++i) {
    nlohmann::json entry;
    entry["id"] = result.selected_ids[i];
    if (is_sentinel(result.scores[i])) {
      entry["score"] = nullptr;
    } else {
      entry["score"] = result.scores[i];
    }
    entry["argmax_target"] = result.argmax_targets[i];
    selected.push_back(std::move(entry));
  }
  nlohmann::json doc;
  doc["budget"] = result.budget;
  doc["checkpoint_tag"] = checkpoint_tag;
  doc["tie_break"] = result.tie_break_note;
  doc["selected"] = std::move(selected);

  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("write_selection_json: cannot open " + path.string());
  }
  out << doc.dump(2) << '\n';
  out.flush();
  if (!out) {
    throw IoError("write_selection_json: write failed for " + path.string());
  }
}

void write_pairwise_features(const ScoreTable& table, const std::filesystem::path& path) {
  std::vector<float> values(table.pairwise.size());
  for (std::size_t i = 0; i < table.pairwise.size(); ++i) {
    values[i] = static_cast<float>(table.pairwise[i]);
  }
  gradstore::GradientMatrix matrix(table.n_candidates, table.n_targets, std::move(values),
                                   table.candidate_ids, table.checkpoint_tag);
  gradstore::write_features(matrix, path);
}

}  // namespace gist::scoring
