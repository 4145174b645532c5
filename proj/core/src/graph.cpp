// Copyright 2026 The rgcnn Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rgcnn/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>

#include "rgcnn/errors.hpp"

namespace rgcnn {
namespace {

Matrix adjacency_of(const Matrix& features, double beta) {
  const std::size_t n = features.rows();
  const std::size_t f = features.cols();
  if (n < 2) throw ContractError("build_graph: need at least 2 points");
  if (!(beta > 0.0)) throw ContractError("build_graph: beta must be positive");
  // Coordinates are read column by column so that the inner loop runs over
  // j and vectorizes. Every pair still accumulates its squared distance in
  // channel order, which keeps a(i, j) independent of the point ordering.
  const Matrix ft = transpose(features);
  Matrix a(n, n);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(d2.begin(), d2.end(), 0.0);
    for (std::size_t c = 0; c < f; ++c) {
      const double pic = features(i, c);
      const double* col = ft.row(c).data();
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = pic - col[j];
        d2[j] += d * d;
      }
    }
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = std::exp(-beta * d2[j]);
  }
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) a(i, j) = a(j, i);
  }
  return a;
}

// Weights lie in [0, 1]. Each is truncated to a multiple of 2^-100 and
// summed as a 128-bit integer. Integer addition is associative, so a degree
// is bit-identical under any reordering of the points; the truncation error
// stays below n * 2^-100.
constexpr int kDegreeFractionBits = 100;

double order_independent_sum(std::span<const double> weights) {
  unsigned __int128 acc = 0;
  for (double w : weights) {
    if (!(w > 0.0)) continue;
    // w = bits * 2^(biased - 1075) for normal doubles; subnormals are far
    // below the resolution and dropped.
    const auto raw = std::bit_cast<std::uint64_t>(w);
    const int biased = static_cast<int>(raw >> 52);
    if (biased == 0) continue;
    const std::uint64_t bits = (raw & ((std::uint64_t{1} << 52) - 1)) | (std::uint64_t{1} << 52);
    const int shift = biased - 1075 + kDegreeFractionBits;
    if (shift >= 0) {
      acc += static_cast<unsigned __int128>(bits) << shift;
    } else if (shift > -64) {
      acc += bits >> -shift;
    }
  }
  const auto hi = static_cast<std::uint64_t>(acc >> 64);
  const auto lo = static_cast<std::uint64_t>(acc);
  return std::ldexp(static_cast<double>(hi), 64 - kDegreeFractionBits) +
         std::ldexp(static_cast<double>(lo), -kDegreeFractionBits);
}

std::vector<double> degrees_of(const Matrix& a) {
  std::vector<double> degree(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) degree[i] = order_independent_sum(a.row(i));
  return degree;
}

}  // namespace

Graph build_graph(const Matrix& features, double beta) {
  Graph g;
  g.adjacency = adjacency_of(features, beta);
  g.degree = degrees_of(g.adjacency);
  const std::size_t n = features.rows();

  g.laplacian_combinatorial = -1.0 * g.adjacency;
  for (std::size_t i = 0; i < n; ++i) g.laplacian_combinatorial(i, i) = g.degree[i];

  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    inv_sqrt[i] = 1.0 / std::sqrt(std::max(g.degree[i], kMinDegree));
  }
  g.laplacian_normalized = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      g.laplacian_normalized(i, j) = g.laplacian_combinatorial(i, j) * inv_sqrt[i] * inv_sqrt[j];
    }
  }
  return g;
}

Matrix normalized_laplacian(const Matrix& features, double beta) {
  Matrix a = adjacency_of(features, beta);
  const std::vector<double> degree = degrees_of(a);
  const std::size_t n = a.rows();
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    inv_sqrt[i] = 1.0 / std::sqrt(std::max(degree[i], kMinDegree));
  }
  // Same arithmetic as build_graph, in place.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double lc = i == j ? degree[i] : -a(i, j);
      a(i, j) = lc * inv_sqrt[i] * inv_sqrt[j];
    }
  }
  return a;
}

GraphSpectrum::GraphSpectrum(const Matrix& laplacian) : eig_(symmetric_eigen(laplacian)) {}

Matrix GraphSpectrum::gft(const Matrix& x) const {
  if (x.rows() != size()) {
    throw ShapeError("gft: signal has " + std::to_string(x.rows()) + " rows for a graph of " +
                     std::to_string(size()) + " vertices");
  }
  return matmul_tn(eig_.eigenvectors, x);
}

Matrix GraphSpectrum::inverse_gft(const Matrix& alpha) const {
  if (alpha.rows() != size()) {
    throw ShapeError("inverse_gft: coefficient count does not match graph size");
  }
  return matmul(eig_.eigenvectors, alpha);
}

Matrix gft(const Matrix& laplacian, const Matrix& x) { return GraphSpectrum(laplacian).gft(x); }

double chebyshev_series(std::span<const double> theta, double lambda) {
  double t_prev = 1.0;
  double t_cur = lambda;
  double acc = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (k == 0) {
      acc += theta[0] * t_prev;
    } else if (k == 1) {
      acc += theta[1] * t_cur;
    } else {
      const double t_next = 2.0 * lambda * t_cur - t_prev;
      t_prev = t_cur;
      t_cur = t_next;
      acc += theta[k] * t_cur;
    }
  }
  return acc;
}

Matrix spectral_filter_oracle(const Matrix& laplacian, const Matrix& x,
                              std::span<const double> theta) {
  if (theta.empty()) throw ContractError("spectral_filter_oracle: empty coefficient list");
  const GraphSpectrum spectrum(laplacian);
  Matrix alpha = spectrum.gft(x);
  for (std::size_t i = 0; i < alpha.rows(); ++i) {
    const double g = chebyshev_series(theta, spectrum.eigenvalues()[i]);
    for (double& v : alpha.row(i)) v *= g;
  }
  return spectrum.inverse_gft(alpha);
}

double smoothness_quadratic(const Matrix& laplacian, const Matrix& y) {
  if (laplacian.rows() != laplacian.cols() || laplacian.cols() != y.rows()) {
    throw ShapeError("smoothness_quadratic: Laplacian and signal sizes differ");
  }
  const Matrix ly = matmul(laplacian, y);
  double s = 0.0;
  auto a = y.data();
  auto b = ly.data();
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Var smoothness_quadratic(Var laplacian, Var y) { return trace_quadratic(laplacian, y); }

}  // namespace rgcnn
