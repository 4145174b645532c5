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

#include "rgcnn/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rgcnn/errors.hpp"

namespace rgcnn {
namespace {

double off_diagonal_sq(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i + 1; j < a.cols(); ++j) s += a(i, j) * a(i, j);
  }
  return s;
}

// Applies the rotation that annihilates a(p, q) to both a and the
// accumulated eigenvector matrix v.
void rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
  const double apq = a(p, q);
  const double app = a(p, p);
  const double aqq = a(q, q);
  const double theta = (aqq - app) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const std::size_t n = a.rows();

  for (std::size_t k = 0; k < n; ++k) {
    if (k == p || k == q) continue;
    const double akp = a(k, p);
    const double akq = a(k, q);
    const double new_kp = c * akp - s * akq;
    const double new_kq = s * akp + c * akq;
    a(k, p) = a(p, k) = new_kp;
    a(k, q) = a(q, k) = new_kq;
  }
  a(p, p) = app - t * apq;
  a(q, q) = aqq + t * apq;
  a(p, q) = a(q, p) = 0.0;

  for (std::size_t k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

}  // namespace

EigenDecomposition symmetric_eigen(const Matrix& m) {
  if (m.rows() != m.cols()) throw ContractError("symmetric_eigen: matrix is not square");
  if (!is_symmetric(m, 1e-9)) throw ContractError("symmetric_eigen: matrix is not symmetric");
  if (!m.all_finite()) throw NumericalError("symmetric_eigen: non-finite input");

  const std::size_t n = m.rows();
  Matrix a = m;
  // Symmetrize exactly so rotations can update both triangles together.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (m(i, j) + m(j, i));
  }
  Matrix v = Matrix::identity(n);

  const double scale = std::max(frobenius_norm(a), std::numeric_limits<double>::min());
  const double eps = std::numeric_limits<double>::epsilon();
  const double target = (eps * scale) * (eps * scale);

  bool converged = off_diagonal_sq(a) <= target;
  for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        // Entries already negligible next to both diagonals are zeroed
        // outright; rotating them only adds rounding.
        const double apq = std::abs(a(p, q));
        if (apq == 0.0) continue;
        if (apq < eps * 1e-3 * std::min(std::abs(a(p, p)), std::abs(a(q, q)))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        rotate(a, v, p, q);
      }
    }
    converged = off_diagonal_sq(a) <= target;
  }
  if (!converged) {
    throw NumericalError("symmetric_eigen: no convergence after " +
                         std::to_string(kMaxJacobiSweeps) + " sweeps");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  EigenDecomposition out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t src = order[c];
    out.eigenvalues[c] = a(src, src);
    std::size_t pivot = 0;
    for (std::size_t r = 1; r < n; ++r) {
      if (std::abs(v(r, src)) > std::abs(v(pivot, src))) pivot = r;
    }
    const double sign = v(pivot, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, c) = sign * v(r, src);
  }
  return out;
}

Matrix reconstruct(const EigenDecomposition& eig) {
  Matrix scaled = eig.eigenvectors;
  for (std::size_t r = 0; r < scaled.rows(); ++r) {
    for (std::size_t c = 0; c < scaled.cols(); ++c) scaled(r, c) *= eig.eigenvalues[c];
  }
  return matmul_nt(scaled, eig.eigenvectors);
}

}  // namespace rgcnn
