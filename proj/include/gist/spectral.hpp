// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gist/gradstore.hpp"
#include "gist/linalg.hpp"

// Task-subspace recovery from target gradients. The right singular basis of
// the n x d target matrix is obtained from the eigendecomposition of the
// small n x n row Gram (never a d x d object on the production path), the
// rank is picked by a variance threshold with a few-shot full-rank override,
// and subspace diagnostics (principal angles, Davis-Kahan) live alongside.

namespace gist::spectral {

/// sigma_i <= kRankTolerance * sigma_1 counts as numerically zero.
inline constexpr double kRankTolerance = 1e-10;
/// Adjacent singular values closer than this (relative to sigma_1) form a
/// degenerate cluster; their individual vectors are not well defined.
inline constexpr double kDegenerateClusterRel = 1e-6;
/// Eigengaps below this fraction of lambda_1 refuse Davis-Kahan division.
inline constexpr double kDegenerateGapRel = 1e-8;
/// Row-gram results are capped at this many pool rows.
inline constexpr std::size_t kMaxRowGramRows = 16384;
/// Col-gram (the d x d Fisher proxy) exists only for toy-scale dimensions.
inline constexpr std::size_t kMaxColGramDim = 4096;

struct SpectrumReport {
  std::vector<double> singular_values;     // descending, >= 0
  std::vector<double> explained_variance;  // cumulative sigma^2 fractions
  std::vector<double> eigengaps;           // gamma_r = sigma_r^2 - sigma_{r+1}^2 (1-based r)

  /// gamma_r = sigma_r^2 - sigma_{r+1}^2 with sigma beyond the spectrum = 0.
  double eigengap_at(std::size_t r) const;
  /// True when sigma_r and sigma_{r+1} sit in one degenerate cluster.
  bool degenerate_at(std::size_t r) const;
};

struct RankPolicy {
  double variance_threshold = 0.95;
  std::size_t fewshot_full_rank_below = 16;
  std::optional<std::size_t> max_rank;
};

enum class RankBranch {
  fewshot_full_rank,
  variance_threshold,
};

/// Orthonormal basis V_r of the task subspace with its singular values.
/// The basis is stored column-major (column = one right singular vector).
class TargetProjector {
 public:
  TargetProjector() = default;
  TargetProjector(std::size_t dim, std::size_t rank, std::vector<double> basis_col_major,
                  std::vector<double> singular_values, std::string source_checkpoint);

  std::size_t dim() const { return dim_; }
  std::size_t rank() const { return rank_; }
  const double* column(std::size_t j) const { return basis_.data() + j * dim_; }
  const std::vector<double>& basis_col_major() const { return basis_; }
  const std::vector<double>& singular_values() const { return singular_values_; }
  const std::string& source_checkpoint() const { return source_checkpoint_; }

  /// Basis as a d x r matrix (column j = singular vector j).
  linalg::Matrix basis_matrix() const;

  /// Projector keeping only the leading r columns.
  TargetProjector truncated(std::size_t r) const;

  /// Throws ValidationError unless V^T V = I within tol (entrywise).
  void validate_orthonormal(double tol = 1e-8) const;

 private:
  std::size_t dim_ = 0;
  std::size_t rank_ = 0;
  std::vector<double> basis_;  // dim_ * rank_, column-major
  std::vector<double> singular_values_;
  std::string source_checkpoint_;
};

enum class GramMode {
  row_gram,  // G G^T over the pool (targets); exact, f64, symmetrized
  col_gram,  // (1/n) G^T G, the Fisher-type proxy; toy-scale d only
};

/// Exact Gram of the concatenated chunks. All chunks must share dim.
linalg::Matrix accumulate_gram(std::span<const gradstore::GradientMatrix> chunks, GramMode mode);

struct ProjectorBuild {
  TargetProjector projector;
  SpectrumReport spectrum;
  RankBranch branch = RankBranch::variance_threshold;
  std::size_t numerical_rank = 0;
};

/// Gram-trick compact SVD of the target matrix plus the rank policy.
ProjectorBuild build_projector(const gradstore::GradientMatrix& targets,
                               const RankPolicy& policy);

/// Rows Pi g_i = V_r^T g_i, f64, n x r.
linalg::Matrix project(const TargetProjector& projector, const gradstore::GradientMatrix& vectors);

/// V_r^T row into out[0..rank).
void project_row(const TargetProjector& projector, const float* row, double* out);

/// ||G - G P_r||_F^2.
double reconstruction_error(const TargetProjector& projector,
                            const gradstore::GradientMatrix& targets);

struct SubspaceDistance {
  std::vector<double> principal_angles;  // ascending, in [0, pi/2]
  double sin_theta_max = 0.0;
};

/// Principal angles between two orthonormal d x r bases (columns = vectors).
SubspaceDistance principal_angles(const linalg::Matrix& basis_a, const linalg::Matrix& basis_b);

struct DavisKahanCheck {
  double lhs = 0.0;  // ||sin Theta(S_r(A), S_r(B))||_2
  double rhs = 0.0;  // ||A - B||_2 / gamma_r(B)
  double gap = 0.0;  // gamma_r(B)
  bool holds = false;
};

/// Both sides of the sin-theta bound for symmetric A against reference B.
DavisKahanCheck davis_kahan_bound_check(const linalg::Matrix& matrix_a,
                                        const linalg::Matrix& matrix_b, std::size_t r);

// Projector artifact file:
//   [magic "GISTPROJ"][u32 version=1][u64 d][u64 r][u32 tag_len][tag]
//   [r f64 singular values][d*r f32 basis, column-major]
inline constexpr char kProjectorMagic[8] = {'G', 'I', 'S', 'T', 'P', 'R', 'O', 'J'};

void write_projector(const TargetProjector& projector, const std::filesystem::path& path);
/// Loads a projector; orthonormality is only required to f32 storage accuracy.
TargetProjector read_projector(const std::filesystem::path& path);

/// CSV with columns (index, sigma, cumulative_variance, gap), 1-based index.
void write_spectrum_csv(const SpectrumReport& report, const std::filesystem::path& path);

}  // namespace gist::spectral
