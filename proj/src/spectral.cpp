// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include "gist/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "gist/errors.hpp"
#include "gist/kernels.hpp"

namespace gist::spectral {

namespace {

constexpr std::size_t kMagicLen = 8;
constexpr std::uint32_t kProjectorVersion = 1;
constexpr std::uint32_t kMaxTagLen = 1u << 20;

void check_same_pool(std::span<const gradstore::GradientMatrix> chunks) {
  if (chunks.empty()) {
    throw ArgumentError("accumulate_gram: empty pool");
  }
  const std::size_t dim = chunks.front().dim();
  std::size_t total = 0;
  for (const auto& c : chunks) {
    if (c.dim() != dim) {
      throw ArgumentError("accumulate_gram: chunks disagree on dim");
    }
    total += c.rows();
  }
  if (total == 0) {
    throw ArgumentError("accumulate_gram: empty pool");
  }
}

}  // namespace

double SpectrumReport::eigengap_at(std::size_t r) const {
  if (r == 0 || r > singular_values.size()) {
    throw ArgumentError("eigengap_at: rank out of range");
  }
  return eigengaps[r - 1];
}

bool SpectrumReport::degenerate_at(std::size_t r) const {
  if (r == 0 || r > singular_values.size()) {
    throw ArgumentError("degenerate_at: rank out of range");
  }
  if (r == singular_values.size()) {
    return false;
  }
  const double s1 = singular_values.front();
  if (s1 <= 0.0) {
    return true;
  }
  return (singular_values[r - 1] - singular_values[r]) < kDegenerateClusterRel * s1;
}

TargetProjector::TargetProjector(std::size_t dim, std::size_t rank,
                                 std::vector<double> basis_col_major,
                                 std::vector<double> singular_values,
                                 std::string source_checkpoint)
    : dim_(dim),
      rank_(rank),
      basis_(std::move(basis_col_major)),
      singular_values_(std::move(singular_values)),
      source_checkpoint_(std::move(source_checkpoint)) {
  if (basis_.size() != dim_ * rank_) {
    throw ArgumentError("TargetProjector: basis buffer does not match dim * rank");
  }
  if (singular_values_.size() != rank_) {
    throw ArgumentError("TargetProjector: one singular value per basis column required");
  }
}

linalg::Matrix TargetProjector::basis_matrix() const {
  linalg::Matrix m(dim_, rank_);
  for (std::size_t j = 0; j < rank_; ++j) {
    const double* col = column(j);
    for (std::size_t i = 0; i < dim_; ++i) {
      m(i, j) = col[i];
    }
  }
  return m;
}

TargetProjector TargetProjector::truncated(std::size_t r) const {
  if (r > rank_) {
    throw ArgumentError("truncated: rank exceeds projector rank");
  }
  std::vector<double> basis(basis_.begin(), basis_.begin() + static_cast<std::ptrdiff_t>(r * dim_));
  std::vector<double> sv(singular_values_.begin(),
                         singular_values_.begin() + static_cast<std::ptrdiff_t>(r));
  return TargetProjector(dim_, r, std::move(basis), std::move(sv), source_checkpoint_);
}

void TargetProjector::validate_orthonormal(double tol) const {
  for (std::size_t a = 0; a < rank_; ++a) {
    for (std::size_t b = a; b < rank_; ++b) {
      const double dot = kernels::dot_dd(column(a), column(b), dim_);
      const double expect = (a == b) ? 1.0 : 0.0;
      if (std::abs(dot - expect) > tol) {
        throw ValidationError("TargetProjector: basis not orthonormal (columns " +
                              std::to_string(a) + ", " + std::to_string(b) + ")");
      }
    }
  }
}

linalg::Matrix accumulate_gram(std::span<const gradstore::GradientMatrix> chunks, GramMode mode) {
  check_same_pool(chunks);
  const std::size_t dim = chunks.front().dim();
  std::size_t total_rows = 0;
  for (const auto& c : chunks) total_rows += c.rows();

  if (mode == GramMode::row_gram) {
    if (total_rows > kMaxRowGramRows) {
      throw CapacityError("row-gram of " + std::to_string(total_rows) +
                          " rows exceeds the configured cap");
    }
    // Row pointers across chunk boundaries; each Gram entry is one full-length
    // dot product, so the result does not depend on the chunking.
    std::vector<const float*> rows;
    rows.reserve(total_rows);
    for (const auto& c : chunks) {
      for (std::size_t i = 0; i < c.rows(); ++i) rows.push_back(c.row(i));
    }
    linalg::Matrix gram(total_rows, total_rows);
    for (std::size_t i = 0; i < total_rows; ++i) {
      for (std::size_t j = i; j < total_rows; ++j) {
        const double v = kernels::dot_ff(rows[i], rows[j], dim);
        gram(i, j) = v;
        gram(j, i) = v;
      }
    }
    return gram;
  }

  if (dim > kMaxColGramDim) {
    throw CapacityError("col-gram of dim " + std::to_string(dim) +
                        " exceeds the toy-scale cap");
  }
  linalg::Matrix fisher(dim, dim);
  for (const auto& c : chunks) {
    for (std::size_t i = 0; i < c.rows(); ++i) {
      const float* g = c.row(i);
      for (std::size_t a = 0; a < dim; ++a) {
        const double ga = static_cast<double>(g[a]);
        if (ga == 0.0) continue;
        kernels::axpy_fd(ga, g, fisher.row(a), dim);
      }
    }
  }
  const double inv_n = 1.0 / static_cast<double>(total_rows);
  for (std::size_t i = 0; i < dim * dim; ++i) {
    fisher.data()[i] *= inv_n;
  }
  return linalg::symmetrize(fisher);
}

ProjectorBuild build_projector(const gradstore::GradientMatrix& targets,
                               const RankPolicy& policy) {
  if (targets.rows() == 0) {
    throw ArgumentError("build_projector: target pool is empty");
  }
  if (policy.variance_threshold <= 0.0 || policy.variance_threshold > 1.0) {
    throw ArgumentError("build_projector: variance_threshold must lie in (0, 1]");
  }
  const std::size_t n = targets.rows();
  const std::size_t d = targets.dim();

  const linalg::Matrix gram = accumulate_gram({&targets, 1}, GramMode::row_gram);
  const linalg::SymmetricEigen eig = linalg::eigh(gram);

  SpectrumReport report;
  report.singular_values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    report.singular_values[i] = std::sqrt(std::max(eig.values[i], 0.0));
  }
  const double sigma1 = report.singular_values.front();
  if (sigma1 <= 0.0) {
    throw DegenerateSubspaceError("build_projector: all-zero target matrix");
  }

  double energy = 0.0;
  for (double s : report.singular_values) energy += s * s;
  report.explained_variance.resize(n);
  double running = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    running += report.singular_values[i] * report.singular_values[i];
    report.explained_variance[i] = running / energy;
  }
  report.eigengaps.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double cur = report.singular_values[i] * report.singular_values[i];
    const double next = (i + 1 < n) ? report.singular_values[i + 1] * report.singular_values[i + 1]
                                    : 0.0;
    report.eigengaps[i] = cur - next;
  }

  std::size_t numerical_rank = 0;
  for (double s : report.singular_values) {
    if (s > kRankTolerance * sigma1) ++numerical_rank;
  }

  RankBranch branch;
  std::size_t rank;
  if (n < policy.fewshot_full_rank_below) {
    branch = RankBranch::fewshot_full_rank;
    rank = numerical_rank;
  } else {
    branch = RankBranch::variance_threshold;
    rank = numerical_rank;
    for (std::size_t i = 0; i < n; ++i) {
      if (report.explained_variance[i] >= policy.variance_threshold) {
        rank = i + 1;
        break;
      }
    }
    rank = std::min(rank, numerical_rank);
  }
  if (policy.max_rank) {
    rank = std::min(rank, *policy.max_rank);
  }
  if (rank == 0) {
    throw DegenerateSubspaceError("build_projector: rank policy selected rank 0");
  }

  // V_r = G^T U_r diag(1/sigma), column by column. Rows are accumulated in
  // ascending index order, so the result is independent of any row chunking.
  std::vector<double> basis(d * rank, 0.0);
  for (std::size_t j = 0; j < rank; ++j) {
    double* col = basis.data() + j * d;
    for (std::size_t i = 0; i < n; ++i) {
      const double weight = eig.vectors(i, j);
      if (weight != 0.0) {
        kernels::axpy_fd(weight, targets.row(i), col, d);
      }
    }
    const double inv_sigma = 1.0 / report.singular_values[j];
    for (std::size_t i = 0; i < d; ++i) col[i] *= inv_sigma;

    // sign convention: largest-magnitude entry nonnegative (first occurrence
    // wins on exact ties)
    std::size_t arg = 0;
    double best = std::abs(col[0]);
    for (std::size_t i = 1; i < d; ++i) {
      const double mag = std::abs(col[i]);
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (col[arg] < 0.0) {
      for (std::size_t i = 0; i < d; ++i) col[i] = -col[i];
    }
  }

  std::vector<double> sv(report.singular_values.begin(),
                         report.singular_values.begin() + static_cast<std::ptrdiff_t>(rank));
  TargetProjector projector(d, rank, std::move(basis), std::move(sv), targets.checkpoint_tag());
  projector.validate_orthonormal(1e-8);
  return ProjectorBuild{std::move(projector), std::move(report), branch, numerical_rank};
}

void project_row(const TargetProjector& projector, const float* row, double* out) {
  for (std::size_t j = 0; j < projector.rank(); ++j) {
    out[j] = kernels::dot_fd(row, projector.column(j), projector.dim());
  }
}

linalg::Matrix project(const TargetProjector& projector, const gradstore::GradientMatrix& vectors) {
  if (vectors.dim() != projector.dim()) {
    throw ArgumentError("project: vector dim " + std::to_string(vectors.dim()) +
                        " does not match projector dim " + std::to_string(projector.dim()));
  }
  linalg::Matrix out(vectors.rows(), projector.rank());
  for (std::size_t i = 0; i < vectors.rows(); ++i) {
    project_row(projector, vectors.row(i), out.row(i));
  }
  return out;
}

double reconstruction_error(const TargetProjector& projector,
                            const gradstore::GradientMatrix& targets) {
  if (targets.dim() != projector.dim()) {
    throw ArgumentError("reconstruction_error: dim mismatch");
  }
  std::vector<double> coords(projector.rank());
  double total = 0.0;
  for (std::size_t i = 0; i < targets.rows(); ++i) {
    const float* row = targets.row(i);
    const double norm_sq = kernels::dot_ff(row, row, targets.dim());
    project_row(projector, row, coords.data());
    double proj_sq = 0.0;
    for (double c : coords) proj_sq += c * c;
    total += norm_sq - proj_sq;
  }
  return std::max(total, 0.0);
}

SubspaceDistance principal_angles(const linalg::Matrix& basis_a, const linalg::Matrix& basis_b) {
  if (basis_a.rows() != basis_b.rows() || basis_a.cols() != basis_b.cols()) {
    throw ArgumentError("principal_angles: bases must share shape");
  }
  const std::size_t r = basis_a.cols();
  if (r == 0) {
    throw ArgumentError("principal_angles: empty bases");
  }
  for (const auto* basis : {&basis_a, &basis_b}) {
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = i; j < r; ++j) {
        double dot = 0.0;
        for (std::size_t k = 0; k < basis->rows(); ++k) {
          dot += (*basis)(k, i) * (*basis)(k, j);
        }
        const double expect = (i == j) ? 1.0 : 0.0;
        if (std::abs(dot - expect) > 1e-6) {
          throw ArgumentError("principal_angles: basis not orthonormal");
        }
      }
    }
  }

  // cos(theta_i) = sigma_i(A^T B); obtained from the eigenvalues of
  // (A^T B)^T (A^T B) so small angles come out through 1 - lambda.
  linalg::Matrix m(r, r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < basis_a.rows(); ++k) {
        dot += basis_a(k, i) * basis_b(k, j);
      }
      m(i, j) = dot;
    }
  }
  linalg::Matrix mtm(r, r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < r; ++k) {
        acc += m(k, i) * m(k, j);
      }
      mtm(i, j) = acc;
    }
  }
  const linalg::SymmetricEigen eig = linalg::eigh(mtm);

  SubspaceDistance out;
  out.principal_angles.resize(r);
  for (std::size_t i = 0; i < r; ++i) {
    const double lambda = std::clamp(eig.values[i], 0.0, 1.0);
    out.principal_angles[i] = std::acos(std::sqrt(lambda));
  }
  const double lambda_min = std::clamp(eig.values.back(), 0.0, 1.0);
  out.sin_theta_max = std::sqrt(std::max(0.0, 1.0 - lambda_min));
  return out;
}

DavisKahanCheck davis_kahan_bound_check(const linalg::Matrix& matrix_a,
                                        const linalg::Matrix& matrix_b, std::size_t r) {
  if (matrix_a.rows() != matrix_a.cols() || matrix_b.rows() != matrix_b.cols() ||
      matrix_a.rows() != matrix_b.rows()) {
    throw ArgumentError("davis_kahan_bound_check: matrices must be square and equal size");
  }
  const std::size_t d = matrix_a.rows();
  if (r == 0 || r >= d) {
    throw ArgumentError("davis_kahan_bound_check: rank must lie in [1, d-1]");
  }

  const linalg::SymmetricEigen eig_a = linalg::eigh(matrix_a);
  const linalg::SymmetricEigen eig_b = linalg::eigh(matrix_b);

  const double gap = eig_b.values[r - 1] - eig_b.values[r];
  double scale = 0.0;
  for (double v : eig_b.values) scale = std::max(scale, std::abs(v));
  if (gap <= kDegenerateGapRel * std::max(scale, 1e-300)) {
    throw DegenerateGapError("davis_kahan_bound_check: eigengap at rank " + std::to_string(r) +
                             " is degenerate");
  }

  DavisKahanCheck check;
  check.gap = gap;
  check.lhs = principal_angles(eig_a.top_vectors(r), eig_b.top_vectors(r)).sin_theta_max;
  check.rhs = linalg::spectral_norm_sym(matrix_a - matrix_b) / gap;
  check.holds = check.lhs <= check.rhs + 1e-9;
  return check;
}

namespace {

template <typename T>
void write_pod(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const char* what) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) {
    throw CorruptionError(std::string("projector file truncated while reading ") + what);
  }
  return value;
}

}  // namespace

void write_projector(const TargetProjector& projector, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("write_projector: cannot open " + path.string());
  }
  out.write(kProjectorMagic, kMagicLen);
  write_pod(out, kProjectorVersion);
  write_pod(out, static_cast<std::uint64_t>(projector.dim()));
  write_pod(out, static_cast<std::uint64_t>(projector.rank()));
  const std::string& tag = projector.source_checkpoint();
  write_pod(out, static_cast<std::uint32_t>(tag.size()));
  out.write(tag.data(), static_cast<std::streamsize>(tag.size()));
  for (double s : projector.singular_values()) {
    write_pod(out, s);
  }
  for (double v : projector.basis_col_major()) {
    write_pod(out, static_cast<float>(v));
  }
  out.flush();
  if (!out) {
    throw IoError("write_projector: write failed for " + path.string());
  }
}

TargetProjector read_projector(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  char magic[kMagicLen];
  in.read(magic, kMagicLen);
  if (!in || std::memcmp(magic, kProjectorMagic, kMagicLen) != 0) {
    throw FormatError("bad magic in " + path.string());
  }
  const auto version = read_pod<std::uint32_t>(in, "version");
  if (version != kProjectorVersion) {
    throw FormatError("unsupported projector version " + std::to_string(version));
  }
  const auto d = read_pod<std::uint64_t>(in, "dim");
  const auto r = read_pod<std::uint64_t>(in, "rank");
  const auto tag_len = read_pod<std::uint32_t>(in, "tag_len");
  if (tag_len > kMaxTagLen) {
    throw FormatError("checkpoint tag length too large in " + path.string());
  }
  std::string tag(tag_len, '\0');
  in.read(tag.data(), tag_len);
  if (!in) {
    throw CorruptionError("projector file truncated inside checkpoint tag");
  }
  std::vector<double> sv(r);
  for (auto& s : sv) {
    s = read_pod<double>(in, "singular value");
  }
  std::vector<double> basis(d * r);
  for (auto& v : basis) {
    v = static_cast<double>(read_pod<float>(in, "basis entry"));
  }
  char extra;
  if (in.read(&extra, 1)) {
    throw CorruptionError("trailing bytes after projector payload in " + path.string());
  }
  TargetProjector projector(d, r, std::move(basis), std::move(sv), std::move(tag));
  // f32 storage keeps orthonormality only to single precision
  projector.validate_orthonormal(1e-5);
  return projector;
}

void write_spectrum_csv(const SpectrumReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("write_spectrum_csv: cannot open " + path.string());
  }
  out << "index,sigma,cumulative_variance,gap\n";
  char buf[96];
  for (std::size_t i = 0; i < report.singular_values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", i + 1, report.singular_values[i],
                  report.explained_variance[i], report.eigengaps[i]);
    out << buf;
  }
  out.flush();
  if (!out) {
    throw IoError("write_spectrum_csv: write failed for " + path.string());
  }
}

}  // namespace gist::spectral
