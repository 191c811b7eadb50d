// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gist/kernels.hpp"

using namespace gist;

namespace {

struct Vecs {
  std::vector<float> af, bf;
  std::vector<double> ad, bd;
};

Vecs make_vecs(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  Vecs v;
  v.af.resize(n);
  v.bf.resize(n);
  v.ad.resize(n);
  v.bd.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    v.af[i] = static_cast<float>(unif(rng));
    v.bf[i] = static_cast<float>(unif(rng));
    v.ad[i] = unif(rng);
    v.bd[i] = unif(rng);
  }
  return v;
}

double rel_close(double a, double b, double scale) {
  return std::abs(a - b) / std::max(scale, 1.0);
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("dispatched kernels match the scalar reference") {
  const std::size_t lengths[] = {0, 1, 3, 7, 8, 9, 31, 257, 1000, 4096};
  for (std::size_t n : lengths) {
    const Vecs v = make_vecs(1234 + n, n);
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(v.ad[i] * v.bd[i]);

    CHECK(rel_close(kernels::dot_ff(v.af.data(), v.bf.data(), n),
                    kernels::detail::dot_ff_scalar(v.af.data(), v.bf.data(), n), mag) < 1e-12);
    CHECK(rel_close(kernels::dot_fd(v.af.data(), v.bd.data(), n),
                    kernels::detail::dot_fd_scalar(v.af.data(), v.bd.data(), n), mag) < 1e-12);
    CHECK(rel_close(kernels::dot_dd(v.ad.data(), v.bd.data(), n),
                    kernels::detail::dot_dd_scalar(v.ad.data(), v.bd.data(), n), mag) < 1e-12);

    std::vector<double> y1(n, 0.5), y2(n, 0.5);
    kernels::axpy_fd(1.7, v.af.data(), y1.data(), n);
    kernels::detail::axpy_fd_scalar(1.7, v.af.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(rel_close(y1[i], y2[i], 4.0) < 1e-14);
    }
  }
}

TEST_CASE("forcing the scalar path reproduces the reference bit-for-bit") {
  kernels::force_isa(kernels::Isa::scalar);
  const Vecs v = make_vecs(77, 513);
  CHECK(kernels::dot_ff(v.af.data(), v.bf.data(), 513) ==
        kernels::detail::dot_ff_scalar(v.af.data(), v.bf.data(), 513));
  CHECK(kernels::dot_dd(v.ad.data(), v.bd.data(), 513) ==
        kernels::detail::dot_dd_scalar(v.ad.data(), v.bd.data(), 513));
  kernels::reset_isa();
}

TEST_CASE("active isa has a name") {
  CHECK(!kernels::isa_name(kernels::active_isa()).empty());
}

TEST_CASE("hand-checked dot products") {
  const float a[] = {1.0F, 2.0F, 3.0F};
  const float b[] = {4.0F, 5.0F, 6.0F};
  CHECK(kernels::dot_ff(a, b, 3) == doctest::Approx(32.0).epsilon(1e-15));
  const double c[] = {4.0, 5.0, 6.0};
  CHECK(kernels::dot_fd(a, c, 3) == doctest::Approx(32.0).epsilon(1e-15));
}

}  // TEST_SUITE
