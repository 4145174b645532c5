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

#ifndef RGCNN_GRAPH_HPP_
#define RGCNN_GRAPH_HPP_

#include <span>
#include <vector>

#include "rgcnn/eigensolver.hpp"
#include "rgcnn/matrix.hpp"
#include "rgcnn/tape.hpp"

namespace rgcnn {

inline constexpr double kDefaultBeta = 1.0;
inline constexpr double kMinDegree = 1e-12;

// Complete graph over the rows of a feature matrix.
struct Graph {
  Matrix adjacency;             // a_ij = exp(-beta |p_i - p_j|^2), a_ii = 0
  std::vector<double> degree;   // d_i = sum_j a_ij
  Matrix laplacian_combinatorial;  // D - A
  Matrix laplacian_normalized;     // D^-1/2 (D - A) D^-1/2
};

// Builds the Gaussian-kernel complete graph on the rows of `features`.
//
// Row sums are accumulated in sorted order, so permuting the rows of the
// input permutes every output entry exactly. Degrees are clamped below at
// kMinDegree before the normalization; a vertex whose weights all
// underflow becomes isolated rather than producing infinities.
//
// Requires at least 2 rows and beta > 0 (ContractError).
Graph build_graph(const Matrix& features, double beta = kDefaultBeta);

// Only the normalized Laplacian; same values as build_graph(...).laplacian_normalized.
Matrix normalized_laplacian(const Matrix& features, double beta = kDefaultBeta);

// Eigenbasis of a graph Laplacian, the graph Fourier basis.
class GraphSpectrum {
 public:
  explicit GraphSpectrum(const Matrix& laplacian);

  std::size_t size() const { return eig_.eigenvalues.size(); }
  std::span<const double> eigenvalues() const { return eig_.eigenvalues; }
  const Matrix& basis() const { return eig_.eigenvectors; }

  // alpha = U^T x for every column of x.
  Matrix gft(const Matrix& x) const;
  Matrix inverse_gft(const Matrix& alpha) const;

 private:
  EigenDecomposition eig_;
};

Matrix gft(const Matrix& laplacian, const Matrix& x);

// sum_k theta_k T_k(lambda) by the scalar Chebyshev recurrence.
double chebyshev_series(std::span<const double> theta, double lambda);

// U g(Lambda) U^T x with g(lambda) = sum_k theta_k T_k(lambda), evaluated
// exactly through the eigendecomposition. Reference path for testing the
// recurrence-based layer; O(n^3).
Matrix spectral_filter_oracle(const Matrix& laplacian, const Matrix& x,
                              std::span<const double> theta);

// sum over columns f of y_f^T L y_f, i.e. trace(Y^T L Y).
double smoothness_quadratic(const Matrix& laplacian, const Matrix& y);
// Tape-recorded variant; differentiable in y (gradient 2 L Y for symmetric L).
Var smoothness_quadratic(Var laplacian, Var y);

}  // namespace rgcnn

#endif  // RGCNN_GRAPH_HPP_
