// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include "gist/gradstore.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "gist/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "feature files are little-endian; big-endian hosts are unsupported");

namespace gist::gradstore {

namespace {

constexpr std::size_t kMagicLen = 8;
constexpr std::uint32_t kMaxTagLen = 1u << 20;

std::filesystem::path manifest_path(const std::filesystem::path& path) {
  std::filesystem::path p = path;
  p += ".manifest.jsonl";
  return p;
}

template <typename T>
void write_pod(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const char* what) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) {
    throw CorruptionError(std::string("feature file truncated while reading ") + what);
  }
  return value;
}

}  // namespace

std::uint64_t FeatureFileHeader::header_bytes() const {
  return kMagicLen + sizeof(std::uint32_t) + 2 * sizeof(std::uint64_t) +
         2 * sizeof(std::uint32_t) + checkpoint_tag.size();
}

GradientMatrix::GradientMatrix(std::size_t n_rows, std::size_t dim, std::vector<float> values,
                               std::vector<std::string> example_ids, std::string checkpoint_tag)
    : n_rows_(n_rows),
      dim_(dim),
      values_(std::move(values)),
      example_ids_(std::move(example_ids)),
      checkpoint_tag_(std::move(checkpoint_tag)) {
  if (dim_ == 0) {
    throw ArgumentError("GradientMatrix: dim must be >= 1");
  }
  if (values_.size() != n_rows_ * dim_) {
    throw ArgumentError("GradientMatrix: value buffer does not match n_rows * dim");
  }
  if (example_ids_.size() != n_rows_) {
    throw ArgumentError("GradientMatrix: one example id per row required");
  }
  for (std::size_t i = 0; i < n_rows_; ++i) {
    const float* r = row(i);
    for (std::size_t j = 0; j < dim_; ++j) {
      if (!std::isfinite(r[j])) {
        throw ValidationError("GradientMatrix: non-finite value in row " + std::to_string(i));
      }
    }
  }
  std::unordered_set<std::string_view> seen;
  seen.reserve(n_rows_);
  for (const auto& id : example_ids_) {
    if (!seen.insert(id).second) {
      throw ValidationError("GradientMatrix: duplicate example_id '" + id + "'");
    }
  }
}

void DatasetManifest::validate() const {
  std::unordered_set<std::string_view> seen;
  seen.reserve(entries.size());
  std::uint64_t prev = 0;
  bool first = true;
  for (const auto& e : entries) {
    if (!seen.insert(e.example_id).second) {
      throw ValidationError("DatasetManifest: duplicate example_id '" + e.example_id + "'");
    }
    if (!first && e.byte_offset <= prev) {
      throw ValidationError("DatasetManifest: byte offsets must strictly increase");
    }
    prev = e.byte_offset;
    first = false;
  }
}

FeatureFileHeader write_features(const GradientMatrix& matrix,
                                 const std::filesystem::path& path) {
  FeatureFileHeader header;
  header.n_rows = matrix.rows();
  header.dim = matrix.dim();
  header.checkpoint_tag = matrix.checkpoint_tag();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("write_features: cannot open " + path.string());
  }
  out.write(kFeatureMagic, kMagicLen);
  write_pod(out, header.version);
  write_pod(out, header.n_rows);
  write_pod(out, header.dim);
  write_pod(out, header.scalar_width);
  write_pod(out, static_cast<std::uint32_t>(header.checkpoint_tag.size()));
  out.write(header.checkpoint_tag.data(),
            static_cast<std::streamsize>(header.checkpoint_tag.size()));
  out.write(reinterpret_cast<const char*>(matrix.values().data()),
            static_cast<std::streamsize>(header.payload_bytes()));
  out.flush();
  if (!out) {
    throw IoError("write_features: write failed for " + path.string());
  }

  std::ofstream mout(manifest_path(path), std::ios::trunc);
  if (!mout) {
    throw IoError("write_features: cannot open manifest for " + path.string());
  }
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    nlohmann::json line = {{"example_id", matrix.example_ids()[i]}, {"row_index", i}};
    mout << line.dump() << '\n';
  }
  mout.flush();
  if (!mout) {
    throw IoError("write_features: manifest write failed for " + path.string());
  }
  return header;
}

namespace {

FeatureFileHeader read_header_stream(std::ifstream& in, const std::filesystem::path& path) {
  char magic[kMagicLen];
  in.read(magic, kMagicLen);
  if (!in || std::memcmp(magic, kFeatureMagic, kMagicLen) != 0) {
    throw FormatError("bad magic in " + path.string());
  }
  FeatureFileHeader header;
  header.version = read_pod<std::uint32_t>(in, "version");
  if (header.version != kFormatVersion) {
    throw FormatError("unsupported feature file version " + std::to_string(header.version));
  }
  header.n_rows = read_pod<std::uint64_t>(in, "n_rows");
  header.dim = read_pod<std::uint64_t>(in, "dim");
  if (header.dim == 0) {
    throw FormatError("feature file declares dim = 0");
  }
  header.scalar_width = read_pod<std::uint32_t>(in, "scalar_width");
  if (header.scalar_width != kScalarWidth) {
    throw FormatError("unsupported scalar width " + std::to_string(header.scalar_width));
  }
  const auto tag_len = read_pod<std::uint32_t>(in, "tag_len");
  if (tag_len > kMaxTagLen) {
    throw FormatError("checkpoint tag length " + std::to_string(tag_len) + " too large");
  }
  header.checkpoint_tag.resize(tag_len);
  in.read(header.checkpoint_tag.data(), tag_len);
  if (!in) {
    throw CorruptionError("feature file truncated inside checkpoint tag");
  }
  return header;
}

void check_payload_size(const FeatureFileHeader& header, const std::filesystem::path& path) {
  const auto actual = std::filesystem::file_size(path);
  const auto expected = header.header_bytes() + header.payload_bytes();
  if (actual < expected) {
    throw CorruptionError("truncated payload in " + path.string() + ": expected " +
                          std::to_string(expected) + " bytes, found " + std::to_string(actual));
  }
  if (actual > expected) {
    throw CorruptionError("trailing bytes after payload in " + path.string());
  }
}

std::vector<std::string> read_manifest_ids(const std::filesystem::path& path,
                                           std::uint64_t n_rows) {
  const auto mpath = manifest_path(path);
  std::ifstream in(mpath);
  if (!in) {
    throw IoError("missing manifest sidecar " + mpath.string());
  }
  std::vector<std::string> ids;
  ids.reserve(n_rows);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("example_id") || !j.contains("row_index")) {
      throw CorruptionError("malformed manifest line in " + mpath.string());
    }
    if (j["row_index"].get<std::uint64_t>() != ids.size()) {
      throw CorruptionError("manifest row_index out of order in " + mpath.string());
    }
    ids.push_back(j["example_id"].get<std::string>());
  }
  if (ids.size() != n_rows) {
    throw CorruptionError("manifest of " + mpath.string() + " lists " +
                          std::to_string(ids.size()) + " rows, header declares " +
                          std::to_string(n_rows));
  }
  return ids;
}

GradientMatrix read_rows(std::ifstream& in, const FeatureFileHeader& header,
                         std::span<const std::string> ids, std::size_t begin, std::size_t end,
                         const std::filesystem::path& path) {
  const std::size_t n = end - begin;
  std::vector<float> values(n * header.dim);
  in.seekg(static_cast<std::streamoff>(header.header_bytes() +
                                       begin * header.dim * header.scalar_width));
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!in && n > 0) {
    throw CorruptionError("truncated payload while reading rows of " + path.string());
  }
  std::vector<std::string> row_ids(ids.begin() + static_cast<std::ptrdiff_t>(begin),
                                   ids.begin() + static_cast<std::ptrdiff_t>(end));
  return GradientMatrix(n, header.dim, std::move(values), std::move(row_ids),
                        header.checkpoint_tag);
}

}  // namespace

FeatureFileHeader read_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  FeatureFileHeader header = read_header_stream(in, path);
  check_payload_size(header, path);
  return header;
}

GradientMatrix read_features(const std::filesystem::path& path,
                             std::optional<RowRange> row_range) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  FeatureFileHeader header = read_header_stream(in, path);
  check_payload_size(header, path);

  std::size_t begin = 0;
  std::size_t end = header.n_rows;
  if (row_range) {
    begin = row_range->begin;
    end = row_range->end;
    if (begin > end || end > header.n_rows) {
      throw ArgumentError("read_features: row range [" + std::to_string(begin) + ", " +
                          std::to_string(end) + ") out of bounds for " +
                          std::to_string(header.n_rows) + " rows");
    }
  }
  const auto ids = read_manifest_ids(path, header.n_rows);
  return read_rows(in, header, ids, begin, end, path);
}

DatasetManifest read_manifest(const std::filesystem::path& path, bool target_flag) {
  const FeatureFileHeader header = read_header(path);
  const auto ids = read_manifest_ids(path, header.n_rows);
  DatasetManifest manifest;
  manifest.target_flag = target_flag;
  manifest.entries.reserve(ids.size());
  const std::uint64_t row_bytes = header.dim * header.scalar_width;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    manifest.entries.push_back(
        {ids[i], header.checkpoint_tag, header.header_bytes() + i * row_bytes});
  }
  manifest.validate();
  return manifest;
}

ChunkStream::ChunkStream(const std::filesystem::path& path, std::size_t chunk_rows)
    : path_(path), chunk_rows_(chunk_rows) {
  if (chunk_rows_ == 0) {
    throw ArgumentError("stream_chunks: chunk_rows must be >= 1");
  }
  header_ = read_header(path_);
  ids_ = read_manifest_ids(path_, header_.n_rows);
}

std::optional<ChunkStream::Chunk> ChunkStream::next() {
  if (cursor_ >= header_.n_rows) {
    return std::nullopt;
  }
  const std::size_t begin = cursor_;
  const std::size_t end = std::min<std::size_t>(begin + chunk_rows_, header_.n_rows);
  cursor_ = end;
  std::ifstream in(path_, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path_.string());
  }
  return Chunk{read_rows(in, header_, ids_, begin, end, path_), begin};
}

void ChunkStream::reset() { cursor_ = 0; }

ChunkStream stream_chunks(const std::filesystem::path& path, std::size_t chunk_rows) {
  return ChunkStream(path, chunk_rows);
}

}  // namespace gist::gradstore
