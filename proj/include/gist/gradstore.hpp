// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

// On-disk gradient feature format and streaming access.
//
// Binary layout (all integers little-endian):
//   [magic "GISTFEAT"][u32 version=1][u64 n_rows][u64 dim]
//   [u32 scalar_width=4][u32 tag_len][tag bytes]
//   [payload: n_rows * dim little-endian f32, row-major]
// Sidecar manifest at <path>.manifest.jsonl, one JSON object per row:
//   {"example_id": "...", "row_index": N}
//
// Scalars are stored as f32; every downstream accumulation runs in f64.

namespace gist::gradstore {

inline constexpr char kFeatureMagic[8] = {'G', 'I', 'S', 'T', 'F', 'E', 'A', 'T'};
inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::uint32_t kScalarWidth = 4;

struct FeatureFileHeader {
  std::uint32_t version = kFormatVersion;
  std::uint64_t n_rows = 0;
  std::uint64_t dim = 0;
  std::uint32_t scalar_width = kScalarWidth;
  std::string checkpoint_tag;

  std::uint64_t payload_bytes() const { return n_rows * dim * scalar_width; }
  /// On-disk size of magic + fixed fields + tag.
  std::uint64_t header_bytes() const;
};

/// Immutable n x d block of per-example gradients (f32 rows) plus identity.
class GradientMatrix {
 public:
  GradientMatrix() = default;
  /// Validates shape, finiteness (names the offending row) and id uniqueness.
  GradientMatrix(std::size_t n_rows, std::size_t dim, std::vector<float> values,
                 std::vector<std::string> example_ids, std::string checkpoint_tag);

  std::size_t rows() const { return n_rows_; }
  std::size_t dim() const { return dim_; }
  const float* row(std::size_t i) const { return values_.data() + i * dim_; }
  std::span<const float> row_span(std::size_t i) const { return {row(i), dim_}; }
  const std::vector<float>& values() const { return values_; }
  const std::vector<std::string>& example_ids() const { return example_ids_; }
  const std::string& checkpoint_tag() const { return checkpoint_tag_; }

 private:
  std::size_t n_rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> values_;
  std::vector<std::string> example_ids_;
  std::string checkpoint_tag_;
};

struct ManifestEntry {
  std::string example_id;
  std::string source_tag;
  std::uint64_t byte_offset = 0;
};

/// In-memory view of a pool's manifest.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  bool target_flag = false;

  /// Throws ValidationError unless offsets strictly increase and ids are unique.
  void validate() const;
};

struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;  // half-open
};

/// Writes payload + header + sidecar manifest. Returns the header written.
FeatureFileHeader write_features(const GradientMatrix& matrix,
                                 const std::filesystem::path& path);

/// Header only (validates magic/version/scalar width and payload size).
FeatureFileHeader read_header(const std::filesystem::path& path);

/// Full or ranged read; ids come from the sidecar manifest.
GradientMatrix read_features(const std::filesystem::path& path,
                             std::optional<RowRange> row_range = std::nullopt);

/// Manifest of a feature file, with byte offsets computed from the header.
DatasetManifest read_manifest(const std::filesystem::path& path, bool target_flag = false);

/// Contiguous, non-overlapping, in-order chunks covering all rows; the last
/// chunk may be short. Boundaries depend only on (n_rows, chunk_rows).
class ChunkStream {
 public:
  struct Chunk {
    GradientMatrix matrix;
    std::size_t first_row = 0;
  };

  ChunkStream(const std::filesystem::path& path, std::size_t chunk_rows);

  /// Next chunk, or nullopt when exhausted.
  std::optional<Chunk> next();

  /// Restart from row zero.
  void reset();

  const FeatureFileHeader& header() const { return header_; }
  std::size_t chunk_rows() const { return chunk_rows_; }

 private:
  std::filesystem::path path_;
  FeatureFileHeader header_;
  std::vector<std::string> ids_;
  std::size_t chunk_rows_ = 0;
  std::size_t cursor_ = 0;
};

ChunkStream stream_chunks(const std::filesystem::path& path, std::size_t chunk_rows);

}  // namespace gist::gradstore
