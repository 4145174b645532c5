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

#ifndef RGCNN_TAPE_HPP_
#define RGCNN_TAPE_HPP_

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "rgcnn/matrix.hpp"

namespace rgcnn {

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape
// lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Matrix& value() const;
  const Matrix& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Define-by-run reverse-mode differentiation over dense matrices.
//
// Nodes are appended in evaluation order, so operands always precede their
// consumers. A tape is built for one forward pass and discarded afterwards.
// Not thread-safe.
class Tape {
 public:
  // Receives the node's upstream gradient and its own forward value;
  // accumulates into operand gradients through Tape::accumulate.
  using BackwardFn = std::function<void(Tape&, const Matrix& grad, const Matrix& value)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf that never receives a gradient.
  Var constant(Matrix value);
  // Leaf whose gradient is collected by backward().
  Var parameter(Matrix value);

  // Records an interior node. `backward` may be empty for nodes that do not
  // depend on any parameter. Throws NumericalError on non-finite values.
  Var record(Matrix value, std::vector<std::size_t> inputs, BackwardFn backward);

  // Seeds d(output)/d(output) = 1 and runs reverse accumulation. Throws
  // ContractError unless output is 1x1. May be called once per tape.
  void backward(Var output);

  const Matrix& value(std::size_t id) const { return nodes_.at(id).value; }
  // Zero matrix of the node's shape for nodes that received no gradient.
  const Matrix& grad(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Adds g into the gradient of node id; no-op for nodes without
  // requires_grad.
  void accumulate(std::size_t id, const Matrix& g);
  void accumulate(std::size_t id, Matrix&& g);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
  };

  // Stable addresses: callers hold references to values across appends.
  std::deque<Node> nodes_;
  bool backward_done_ = false;
};

inline const Matrix& Var::value() const { return tape_->value(id_); }
inline const Matrix& Var::grad() const { return tape_->grad(id_); }

// Differentiable operations. All operands must live on the same tape.

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double s);
// x (n x F) plus a 1 x F row broadcast over all rows.
Var add_bias(Var x, Var bias);
Var relu(Var x);
Var concat_cols(std::span<const Var> parts);
// Column-wise max over rows: n x F -> 1 x F. Gradient goes to the first
// row attaining the max.
Var row_max_pool(Var x);
Var softmax_rows(Var x);
Var sum(Var x);
// trace(Y^T M Y) for square M.
Var trace_quadratic(Var m, Var y);

}  // namespace rgcnn

#endif  // RGCNN_TAPE_HPP_
