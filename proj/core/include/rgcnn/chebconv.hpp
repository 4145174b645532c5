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

#ifndef RGCNN_CHEBCONV_HPP_
#define RGCNN_CHEBCONV_HPP_

#include <cstddef>
#include <random>
#include <vector>

#include "rgcnn/matrix.hpp"
#include "rgcnn/tape.hpp"

namespace rgcnn {

// Chebyshev graph convolution followed by a point-shared bias and ReLU:
//
//   Y = ReLU( sum_k T_k(L) X theta_k + b )
//
// with one F_in x F_out weight matrix per polynomial order. A rank-one
// theta_k = c_k W reproduces a scalar-coefficient filter followed by a
// single weight matrix.
struct ChebLayer {
  std::size_t order = 1;  // K, number of polynomial terms
  std::size_t in_features = 0;
  std::size_t out_features = 0;
  std::vector<Matrix> theta;  // K matrices, in_features x out_features
  Matrix bias;                // 1 x out_features

  ChebLayer() = default;
  // Zero-initialized layer. Throws ContractError if order == 0.
  ChebLayer(std::size_t order, std::size_t in_features, std::size_t out_features);

  // Uniform(-s, s) weights with s = sqrt(6 / (K * F_in + F_out)), zero bias.
  static ChebLayer initialized(std::size_t order, std::size_t in_features,
                               std::size_t out_features, std::mt19937_64& rng);

  std::size_t parameter_count() const { return order * in_features * out_features + out_features; }
};

// Parameters of a ChebLayer bound to a tape.
struct ChebLayerVars {
  std::vector<Var> theta;
  Var bias;
};

ChebLayerVars bind(Tape& tape, const ChebLayer& layer);

// [T_0(L) X, ..., T_{K-1}(L) X] by the three-term recurrence
// B_k = 2 L B_{k-1} - B_{k-2}. Only n x F products are formed.
std::vector<Var> cheb_basis(Var laplacian, Var x, std::size_t order);
std::vector<Matrix> cheb_basis(const Matrix& laplacian, const Matrix& x, std::size_t order);

// sum_k B_k theta_k + b, before the activation.
Var cheb_preactivation(const ChebLayer& layer, const ChebLayerVars& vars, Var laplacian, Var x);
Var cheb_forward(const ChebLayer& layer, const ChebLayerVars& vars, Var laplacian, Var x);

// Convenience inference path on plain matrices.
Matrix cheb_forward(const ChebLayer& layer, const Matrix& laplacian, const Matrix& x);

}  // namespace rgcnn

#endif  // RGCNN_CHEBCONV_HPP_
