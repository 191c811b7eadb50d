// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string_view>

// Inner-loop arithmetic used by the Gram accumulator, the projector and the
// scorer. Inputs may be f32 (the storage width) but accumulation is always
// f64. Each kernel has a scalar reference implementation and, on x86-64 with
// AVX2+FMA, a vectorized variant selected once at startup. Variants are
// equivalence-tested against the scalar reference.

namespace gist::kernels {

enum class Isa {
  scalar,
  avx2,
};

/// ISA picked for the current process (after any force_isa override).
Isa active_isa();

/// Name of the active ISA, for diagnostics.
std::string_view isa_name(Isa isa);

/// Test hook: pin the dispatch to one ISA. Throws ArgumentError when the
/// requested ISA is unavailable on this machine.
void force_isa(Isa isa);

/// Undo force_isa and return to auto-detection.
void reset_isa();

/// sum_i a[i]*b[i], f64 accumulation.
double dot_ff(const float* a, const float* b, std::size_t n);
double dot_fd(const float* a, const double* b, std::size_t n);
double dot_dd(const double* a, const double* b, std::size_t n);

/// y[i] += alpha * x[i], f64 accumulation into y.
void axpy_fd(double alpha, const float* x, double* y, std::size_t n);

namespace detail {

// Scalar reference kernels; always available and the baseline every SIMD
// variant must reproduce (within summation-order tolerance).
double dot_ff_scalar(const float* a, const float* b, std::size_t n);
double dot_fd_scalar(const float* a, const double* b, std::size_t n);
double dot_dd_scalar(const double* a, const double* b, std::size_t n);
void axpy_fd_scalar(double alpha, const float* x, double* y, std::size_t n);

#if defined(__x86_64__)
bool avx2_available();
double dot_ff_avx2(const float* a, const float* b, std::size_t n);
double dot_fd_avx2(const float* a, const double* b, std::size_t n);
double dot_dd_avx2(const double* a, const double* b, std::size_t n);
void axpy_fd_avx2(double alpha, const float* x, double* y, std::size_t n);
#endif

}  // namespace detail

}  // namespace gist::kernels
