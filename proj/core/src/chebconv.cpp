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

#include "rgcnn/chebconv.hpp"

#include <cmath>
#include <string>

#include "rgcnn/errors.hpp"

namespace rgcnn {
namespace {

void check_shapes(const ChebLayer& layer, const Matrix& laplacian, const Matrix& x) {
  if (laplacian.rows() != laplacian.cols() || laplacian.rows() != x.rows()) {
    throw ShapeError("cheb layer: Laplacian " + std::to_string(laplacian.rows()) + "x" +
                     std::to_string(laplacian.cols()) + " does not match " +
                     std::to_string(x.rows()) + " points");
  }
  if (x.cols() != layer.in_features) {
    throw ShapeError("cheb layer: expected " + std::to_string(layer.in_features) +
                     " input features, got " + std::to_string(x.cols()));
  }
}

}  // namespace

ChebLayer::ChebLayer(std::size_t order, std::size_t in_features, std::size_t out_features)
    : order(order), in_features(in_features), out_features(out_features) {
  if (order == 0) throw ContractError("ChebLayer: order must be at least 1");
  theta.assign(order, Matrix(in_features, out_features));
  bias = Matrix(1, out_features);
}

ChebLayer ChebLayer::initialized(std::size_t order, std::size_t in_features,
                                 std::size_t out_features, std::mt19937_64& rng) {
  ChebLayer layer(order, in_features, out_features);
  const double s =
      std::sqrt(6.0 / static_cast<double>(order * in_features + out_features));
  std::uniform_real_distribution<double> dist(-s, s);
  for (Matrix& t : layer.theta) {
    for (double& v : t.data()) v = dist(rng);
  }
  return layer;
}

ChebLayerVars bind(Tape& tape, const ChebLayer& layer) {
  ChebLayerVars vars;
  for (const Matrix& t : layer.theta) vars.theta.push_back(tape.parameter(t));
  vars.bias = tape.parameter(layer.bias);
  return vars;
}

std::vector<Var> cheb_basis(Var laplacian, Var x, std::size_t order) {
  if (order == 0) throw ContractError("cheb_basis: order must be at least 1");
  const Matrix& l = laplacian.value();
  if (l.rows() != l.cols() || l.cols() != x.rows()) {
    throw ShapeError("cheb_basis: Laplacian and signal sizes differ");
  }
  std::vector<Var> basis{x};
  if (order > 1) basis.push_back(matmul(laplacian, x));
  for (std::size_t k = 2; k < order; ++k) {
    basis.push_back(sub(scale(matmul(laplacian, basis[k - 1]), 2.0), basis[k - 2]));
  }
  return basis;
}

std::vector<Matrix> cheb_basis(const Matrix& laplacian, const Matrix& x, std::size_t order) {
  Tape tape;
  const auto vars = cheb_basis(tape.constant(laplacian), tape.constant(x), order);
  std::vector<Matrix> out;
  out.reserve(vars.size());
  for (const Var& v : vars) out.push_back(v.value());
  return out;
}

Var cheb_preactivation(const ChebLayer& layer, const ChebLayerVars& vars, Var laplacian, Var x) {
  check_shapes(layer, laplacian.value(), x.value());
  if (vars.theta.size() != layer.order) throw ContractError("cheb layer: unbound parameters");
  const auto basis = cheb_basis(laplacian, x, layer.order);
  Var acc = matmul(basis[0], vars.theta[0]);
  for (std::size_t k = 1; k < layer.order; ++k) acc = add(acc, matmul(basis[k], vars.theta[k]));
  return add_bias(acc, vars.bias);
}

Var cheb_forward(const ChebLayer& layer, const ChebLayerVars& vars, Var laplacian, Var x) {
  return relu(cheb_preactivation(layer, vars, laplacian, x));
}

Matrix cheb_forward(const ChebLayer& layer, const Matrix& laplacian, const Matrix& x) {
  Tape tape;
  const auto vars = bind(tape, layer);
  return cheb_forward(layer, vars, tape.constant(laplacian), tape.constant(x)).value();
}

}  // namespace rgcnn
