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

#include "rgcnn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "rgcnn/errors.hpp"

namespace rgcnn {
namespace {

Tape& same_tape(Var a, Var b, const char* op) {
  if (!a.valid() || !b.valid() || &a.tape() != &b.tape()) {
    throw ContractError(std::string(op) + ": operands live on different tapes");
  }
  return a.tape();
}

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Var Tape::constant(Matrix value) {
  if (!value.all_finite()) throw NumericalError("Tape::constant: non-finite value");
  nodes_.push_back(Node{std::move(value), Matrix(), false, {}, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Matrix value) {
  if (!value.all_finite()) throw NumericalError("Tape::parameter: non-finite value");
  nodes_.push_back(Node{std::move(value), Matrix(), true, {}, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::vector<std::size_t> inputs, BackwardFn backward) {
  if (!value.all_finite()) throw NumericalError("Tape::record: non-finite value");
  bool needs = false;
  for (std::size_t id : inputs) {
    if (id >= nodes_.size()) throw ContractError("Tape::record: unknown operand");
    needs = needs || nodes_[id].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), Matrix(), needs && backward != nullptr,
                        std::move(inputs), std::move(backward)});
  return Var(this, nodes_.size() - 1);
}

const Matrix& Tape::grad(std::size_t id) const {
  Node& node = const_cast<Node&>(nodes_.at(id));
  if (node.grad.empty() && !node.value.empty()) {
    node.grad = Matrix(node.value.rows(), node.value.cols());
  }
  return node.grad;
}

void Tape::accumulate(std::size_t id, const Matrix& g) {
  Node& node = nodes_.at(id);
  if (!node.requires_grad) return;
  if (!g.same_shape(node.value)) {
    throw ShapeError("Tape::accumulate: gradient " + shape_str(g) + " for value " +
                     shape_str(node.value));
  }
  if (node.grad.empty()) {
    node.grad = g;
  } else {
    node.grad += g;
  }
}

void Tape::accumulate(std::size_t id, Matrix&& g) {
  Node& node = nodes_.at(id);
  if (!node.requires_grad) return;
  if (node.grad.empty() && g.same_shape(node.value)) {
    node.grad = std::move(g);
    return;
  }
  accumulate(id, static_cast<const Matrix&>(g));
}

void Tape::backward(Var output) {
  if (&output.tape() != this) throw ContractError("Tape::backward: foreign node");
  const Matrix& out = value(output.id());
  if (out.rows() != 1 || out.cols() != 1) {
    throw ContractError("Tape::backward: seed must be 1x1, got " + shape_str(out));
  }
  if (backward_done_) throw ContractError("Tape::backward: already run");
  backward_done_ = true;
  if (!nodes_[output.id()].requires_grad) return;

  nodes_[output.id()].grad = Matrix(1, 1, 1.0);
  for (std::size_t i = output.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.requires_grad || !node.backward || node.grad.empty()) continue;
    node.backward(*this, node.grad, node.value);
  }
}

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b, "matmul");
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return t.record(matmul(a.value(), b.value()), {ia, ib},
                  [ia, ib](Tape& tape, const Matrix& g, const Matrix&) {
                    if (tape.requires_grad(ia)) tape.accumulate(ia, matmul_nt(g, tape.value(ib)));
                    if (tape.requires_grad(ib)) tape.accumulate(ib, matmul_tn(tape.value(ia), g));
                  });
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b, "add");
  if (!a.value().same_shape(b.value())) {
    throw ShapeError("add: " + shape_str(a.value()) + " vs " + shape_str(b.value()));
  }
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return t.record(a.value() + b.value(), {ia, ib}, [ia, ib](Tape& tape, const Matrix& g, const Matrix&) {
    tape.accumulate(ia, g);
    tape.accumulate(ib, g);
  });
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b, "sub");
  if (!a.value().same_shape(b.value())) {
    throw ShapeError("sub: " + shape_str(a.value()) + " vs " + shape_str(b.value()));
  }
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return t.record(a.value() - b.value(), {ia, ib}, [ia, ib](Tape& tape, const Matrix& g, const Matrix&) {
    tape.accumulate(ia, g);
    if (tape.requires_grad(ib)) tape.accumulate(ib, -1.0 * g);
  });
}

Var scale(Var a, double s) {
  const std::size_t ia = a.id();
  return a.tape().record(s * a.value(), {ia},
                         [ia, s](Tape& tape, const Matrix& g, const Matrix&) { tape.accumulate(ia, s * g); });
}

Var add_bias(Var x, Var bias) {
  Tape& t = same_tape(x, bias, "add_bias");
  const Matrix& xv = x.value();
  const Matrix& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != xv.cols()) {
    throw ShapeError("add_bias: bias " + shape_str(bv) + " for input " + shape_str(xv));
  }
  Matrix out = xv;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < out.cols(); ++c) row[c] += bv(0, c);
  }
  const std::size_t ix = x.id();
  const std::size_t ib = bias.id();
  return t.record(std::move(out), {ix, ib}, [ix, ib](Tape& tape, const Matrix& g, const Matrix&) {
    tape.accumulate(ix, g);
    if (tape.requires_grad(ib)) {
      Matrix gb(1, g.cols());
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < g.cols(); ++c) gb(0, c) += g(r, c);
      }
      tape.accumulate(ib, std::move(gb));
    }
  });
}

Var relu(Var x) {
  Matrix out = x.value();
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  const std::size_t ix = x.id();
  return x.tape().record(std::move(out), {ix}, [ix](Tape& tape, const Matrix& g, const Matrix&) {
    const Matrix& in = tape.value(ix);
    Matrix gx = g;
    auto gd = gx.data();
    auto id = in.data();
    for (std::size_t i = 0; i < gd.size(); ++i) {
      if (!(id[i] > 0.0)) gd[i] = 0.0;
    }
    tape.accumulate(ix, std::move(gx));
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_cols: no operands");
  Tape& t = parts.front().tape();
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  std::vector<std::size_t> ids;
  std::vector<std::size_t> widths;
  for (const Var& p : parts) {
    same_tape(parts.front(), p, "concat_cols");
    if (p.rows() != rows) {
      throw ShapeError("concat_cols: row mismatch " + std::to_string(p.rows()) + " vs " +
                       std::to_string(rows));
    }
    ids.push_back(p.id());
    widths.push_back(p.cols());
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Matrix& v = p.value();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(v.row(r).begin(), v.row(r).end(), out.row(r).begin() + offset);
    }
    offset += v.cols();
  }
  return t.record(std::move(out), ids, [ids, widths](Tape& tape, const Matrix& g, const Matrix&) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (tape.requires_grad(ids[k])) {
        Matrix part(g.rows(), widths[k]);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          std::copy_n(g.row(r).begin() + off, widths[k], part.row(r).begin());
        }
        tape.accumulate(ids[k], std::move(part));
      }
      off += widths[k];
    }
  });
}

Var row_max_pool(Var x) {
  const Matrix& v = x.value();
  if (v.rows() == 0) throw ShapeError("row_max_pool: empty input");
  Matrix out(1, v.cols());
  std::vector<std::size_t> argmax(v.cols(), 0);
  for (std::size_t c = 0; c < v.cols(); ++c) {
    double best = v(0, c);
    for (std::size_t r = 1; r < v.rows(); ++r) {
      if (v(r, c) > best) {
        best = v(r, c);
        argmax[c] = r;
      }
    }
    out(0, c) = best;
  }
  const std::size_t ix = x.id();
  const std::size_t rows = v.rows();
  return x.tape().record(std::move(out), {ix},
                         [ix, rows, argmax = std::move(argmax)](Tape& tape, const Matrix& g, const Matrix&) {
                           Matrix gx(rows, g.cols());
                           for (std::size_t c = 0; c < g.cols(); ++c) gx(argmax[c], c) = g(0, c);
                           tape.accumulate(ix, std::move(gx));
                         });
}

Var softmax_rows(Var x) {
  const Matrix& v = x.value();
  Matrix out(v.rows(), v.cols());
  for (std::size_t r = 0; r < v.rows(); ++r) {
    auto in = v.row(r);
    auto o = out.row(r);
    const double m = in.empty() ? 0.0 : *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) z += (o[c] = std::exp(in[c] - m));
    for (double& p : o) p /= z;
  }
  const std::size_t ix = x.id();
  return x.tape().record(std::move(out), {ix},
                         [ix](Tape& tape, const Matrix& g, const Matrix& y) {
                           Matrix gx(y.rows(), y.cols());
                           for (std::size_t r = 0; r < y.rows(); ++r) {
                             double dot = 0.0;
                             for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
                             for (std::size_t c = 0; c < y.cols(); ++c) {
                               gx(r, c) = y(r, c) * (g(r, c) - dot);
                             }
                           }
                           tape.accumulate(ix, std::move(gx));
                         });
}

Var sum(Var x) {
  const std::size_t ix = x.id();
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  return x.tape().record(Matrix(1, 1, sum(x.value())), {ix},
                         [ix, rows, cols](Tape& tape, const Matrix& g, const Matrix&) {
                           tape.accumulate(ix, Matrix(rows, cols, g(0, 0)));
                         });
}

Var trace_quadratic(Var m, Var y) {
  Tape& t = same_tape(m, y, "trace_quadratic");
  const Matrix& mv = m.value();
  const Matrix& yv = y.value();
  if (mv.rows() != mv.cols() || mv.cols() != yv.rows()) {
    throw ShapeError("trace_quadratic: operator " + shape_str(mv) + " with signal " +
                     shape_str(yv));
  }
  const Matrix my = matmul(mv, yv);
  double value = 0.0;
  auto a = yv.data();
  auto b = my.data();
  for (std::size_t i = 0; i < a.size(); ++i) value += a[i] * b[i];
  const std::size_t im = m.id();
  const std::size_t iy = y.id();
  // M Y is kept for the backward pass, which needs (M + M^T) Y.
  return t.record(Matrix(1, 1, value), {im, iy},
                  [im, iy, my](Tape& tape, const Matrix& g, const Matrix&) {
    const Matrix& mv = tape.value(im);
    const Matrix& yv = tape.value(iy);
    const double s = g(0, 0);
    if (tape.requires_grad(iy)) {
      Matrix gy = matmul_tn(mv, yv);
      gy += my;
      tape.accumulate(iy, s * std::move(gy));
    }
    if (tape.requires_grad(im)) tape.accumulate(im, s * matmul_nt(yv, yv));
  });
}

}  // namespace rgcnn
