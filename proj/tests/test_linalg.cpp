// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "gist/errors.hpp"
#include "gist/linalg.hpp"
#include "support/test_oracles.hpp"

using namespace gist;

TEST_SUITE("linalg") {

TEST_CASE("eigh recovers the coupled toy spectrum {20, 1}") {
  linalg::Matrix h(2, 2);
  h(0, 0) = 10.5;
  h(0, 1) = 9.5;
  h(1, 0) = 9.5;
  h(1, 1) = 10.5;
  const auto eig = linalg::eigh(h);
  CHECK(std::abs(eig.values[0] - 20.0) < 1e-9);
  CHECK(std::abs(eig.values[1] - 1.0) < 1e-9);
}

TEST_CASE("eigh satisfies A v = lambda v with orthonormal vectors") {
  for (std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
    const auto a = testing::random_psd(seed, 12, -3.0, 5.0);
    const auto eig = linalg::eigh(a);
    const double scale = linalg::frobenius_norm(a);
    for (std::size_t j = 0; j < 12; ++j) {
      const auto v = eig.vectors.column(j);
      const auto av = linalg::matvec(a, v);
      for (std::size_t i = 0; i < 12; ++i) {
        CHECK(std::abs(av[i] - eig.values[j] * v[i]) < 1e-10 * scale);
      }
      for (std::size_t k = j; k < 12; ++k) {
        double dot = 0.0;
        for (std::size_t i = 0; i < 12; ++i) dot += eig.vectors(i, j) * eig.vectors(i, k);
        CHECK(std::abs(dot - (j == k ? 1.0 : 0.0)) < 1e-12);
      }
    }
    for (std::size_t j = 1; j < 12; ++j) {
      CHECK(eig.values[j - 1] >= eig.values[j]);
    }
  }
}

TEST_CASE("pseudoinverse leaves null-space coordinates alone") {
  linalg::Matrix h(2, 2);
  h(0, 0) = 1.0;
  const auto eig = linalg::eigh(h);
  const std::vector<double> g = {1.0, 0.0};  // H * (1, 1)
  const auto x = eig.apply_pinv(g, 1e-10);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("eigh rejects asymmetric input") {
  linalg::Matrix m(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(linalg::eigh(m), ArgumentError);
}

TEST_CASE("spectral norm of a known matrix") {
  linalg::Matrix m(2, 2);
  m(0, 0) = 3.0;
  m(1, 1) = -7.0;
  CHECK(linalg::spectral_norm_sym(m) == doctest::Approx(7.0).epsilon(1e-14));
}

}  // TEST_SUITE
