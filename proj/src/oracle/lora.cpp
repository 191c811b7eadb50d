// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#include "gist/oracle/lora.hpp"

#include <cmath>
#include <random>

#include "gist/errors.hpp"

namespace gist::oracle {

void LoraModel::validate() const {
  if (b.rows() != d_out() || a.cols() != d_in() || b.cols() != a.rows()) {
    throw ArgumentError("LoraModel: adapter shapes do not compose with w0");
  }
  if (h_w.rows() != w_dim() || h_w.cols() != w_dim()) {
    throw ArgumentError("LoraModel: h_w must be (d_out*d_in)^2");
  }
  if (linear.size() != w_dim()) {
    throw ArgumentError("LoraModel: linear term length mismatch");
  }
  const double scale = linalg::frobenius_norm(h_w);
  if (scale > 0.0 && linalg::asymmetry(h_w) > 1e-10 * scale) {
    throw ValidationError("LoraModel: h_w not symmetric");
  }
  const linalg::SymmetricEigen eig = linalg::eigh(h_w);
  if (!eig.values.empty() && eig.values.back() < -1e-10 * std::max(scale, 1.0)) {
    throw ValidationError("LoraModel: h_w not PSD");
  }
}

std::vector<double> LoraModel::vec_w() const { return vec_w_with_a(a); }

std::vector<double> LoraModel::vec_w_with_a(const linalg::Matrix& a_alt) const {
  if (a_alt.rows() != rank() || a_alt.cols() != d_in()) {
    throw ArgumentError("LoraModel: replacement A has wrong shape");
  }
  std::vector<double> v(w_dim());
  for (std::size_t j = 0; j < d_in(); ++j) {
    for (std::size_t i = 0; i < d_out(); ++i) {
      double acc = w0(i, j);
      for (std::size_t k = 0; k < rank(); ++k) {
        acc += b(i, k) * a_alt(k, j);
      }
      v[i + d_out() * j] = acc;
    }
  }
  return v;
}

namespace {

double quadratic_loss(const linalg::Matrix& h, const std::vector<double>& q,
                      const std::vector<double>& v) {
  const auto hv = linalg::matvec(h, v);
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    acc += 0.5 * v[i] * hv[i] + q[i] * v[i];
  }
  return acc;
}

}  // namespace

double LoraModel::loss() const { return quadratic_loss(h_w, linear, vec_w()); }

double LoraModel::loss_with_a(const linalg::Matrix& a_alt) const {
  return quadratic_loss(h_w, linear, vec_w_with_a(a_alt));
}

std::vector<double> LoraModel::adapter_gradient() const {
  const auto v = vec_w();
  auto w_grad = linalg::matvec(h_w, v);  // H_W v + q
  for (std::size_t i = 0; i < w_grad.size(); ++i) {
    w_grad[i] += linear[i];
  }
  std::vector<double> grad(adapter_dim(), 0.0);
  // dL/dA(k,j) = (e_j (x) B_{:k})^T w_grad = B_{:k} . w_grad[block j]
  for (std::size_t j = 0; j < d_in(); ++j) {
    for (std::size_t k = 0; k < rank(); ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < d_out(); ++i) {
        acc += b(i, k) * w_grad[i + d_out() * j];
      }
      grad[k + rank() * j] = acc;
    }
  }
  // dL/dB(i,k) = (A_{k:}^T (x) e_i)^T w_grad
  const std::size_t b_offset = rank() * d_in();
  for (std::size_t k = 0; k < rank(); ++k) {
    for (std::size_t i = 0; i < d_out(); ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d_in(); ++j) {
        acc += a(k, j) * w_grad[i + d_out() * j];
      }
      grad[b_offset + i + d_out() * k] = acc;
    }
  }
  return grad;
}

LoraModel LoraModel::random(std::uint64_t seed, std::size_t d_out, std::size_t d_in,
                            std::size_t rank, bool coupled) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.5, 2.0);

  LoraModel model;
  model.w0 = linalg::Matrix(d_out, d_in);
  model.b = linalg::Matrix(d_out, rank);
  model.a = linalg::Matrix(rank, d_in);
  for (std::size_t i = 0; i < d_out * d_in; ++i) model.w0.data()[i] = normal(rng);
  for (std::size_t i = 0; i < d_out * rank; ++i) model.b.data()[i] = normal(rng);
  for (std::size_t i = 0; i < rank * d_in; ++i) model.a.data()[i] = normal(rng);

  const std::size_t n = d_out * d_in;
  model.h_w = linalg::Matrix(n, n);
  if (coupled) {
    linalg::Matrix factor(n, n);
    for (std::size_t i = 0; i < n * n; ++i) factor.data()[i] = normal(rng);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          acc += factor(k, i) * factor(k, j);
        }
        model.h_w(i, j) = acc;
        model.h_w(j, i) = acc;
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      model.h_w(i, i) = unif(rng);
    }
  }
  model.linear.resize(n);
  for (auto& q : model.linear) q = normal(rng);
  model.validate();
  return model;
}

double lora_hessian_entry(const LoraModel& model, std::size_t k, std::size_t j1, std::size_t j2) {
  if (k >= model.rank() || j1 >= model.d_in() || j2 >= model.d_in()) {
    throw ArgumentError("lora_hessian_entry: index out of range");
  }
  const std::size_t d_out = model.d_out();
  double acc = 0.0;
  for (std::size_t i1 = 0; i1 < d_out; ++i1) {
    const double bi1 = model.b(i1, k);
    if (bi1 == 0.0) continue;
    for (std::size_t i2 = 0; i2 < d_out; ++i2) {
      acc += bi1 * model.h_w(i1 + d_out * j1, i2 + d_out * j2) * model.b(i2, k);
    }
  }
  return acc;
}

}  // namespace gist::oracle
