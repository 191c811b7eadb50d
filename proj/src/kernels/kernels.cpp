// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include "gist/kernels.hpp"

#include <atomic>
#include <optional>

#include "gist/errors.hpp"

namespace gist::kernels {

namespace {

Isa detect() {
#if defined(__x86_64__)
  if (detail::avx2_available()) {
    return Isa::avx2;
  }
#endif
  return Isa::scalar;
}

std::atomic<int> g_forced{-1};  // -1: auto

Isa current() {
  int forced = g_forced.load(std::memory_order_relaxed);
  if (forced >= 0) {
    return static_cast<Isa>(forced);
  }
  static const Isa detected = detect();
  return detected;
}

}  // namespace

Isa active_isa() { return current(); }

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

void force_isa(Isa isa) {
#if defined(__x86_64__)
  if (isa == Isa::avx2 && !detail::avx2_available()) {
    throw ArgumentError("force_isa: avx2 not available on this machine");
  }
#else
  if (isa == Isa::avx2) {
    throw ArgumentError("force_isa: avx2 not available on this machine");
  }
#endif
  g_forced.store(static_cast<int>(isa), std::memory_order_relaxed);
}

void reset_isa() { g_forced.store(-1, std::memory_order_relaxed); }

double dot_ff(const float* a, const float* b, std::size_t n) {
#if defined(__x86_64__)
  if (current() == Isa::avx2) {
    return detail::dot_ff_avx2(a, b, n);
  }
#endif
  return detail::dot_ff_scalar(a, b, n);
}

double dot_fd(const float* a, const double* b, std::size_t n) {
#if defined(__x86_64__)
  if (current() == Isa::avx2) {
    return detail::dot_fd_avx2(a, b, n);
  }
#endif
  return detail::dot_fd_scalar(a, b, n);
}

double dot_dd(const double* a, const double* b, std::size_t n) {
#if defined(__x86_64__)
  if (current() == Isa::avx2) {
    return detail::dot_dd_avx2(a, b, n);
  }
#endif
  return detail::dot_dd_scalar(a, b, n);
}

void axpy_fd(double alpha, const float* x, double* y, std::size_t n) {
#if defined(__x86_64__)
  if (current() == Isa::avx2) {
    detail::axpy_fd_avx2(alpha, x, y, n);
    return;
  }
#endif
  detail::axpy_fd_scalar(alpha, x, y, n);
}

}  // namespace gist::kernels
