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

#ifndef RGCNN_EIGENSOLVER_HPP_
#define RGCNN_EIGENSOLVER_HPP_

#include <vector>

#include "rgcnn/matrix.hpp"

namespace rgcnn {

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // ascending
  Matrix eigenvectors;              // column i pairs with eigenvalues[i]
};

inline constexpr int kMaxJacobiSweeps = 100;

// Cyclic Jacobi decomposition of a symmetric matrix.
//
// Eigenvalues come back sorted ascending; each eigenvector is sign-normalized
// so that its largest-magnitude component (first one on ties) is positive,
// which makes the result a pure function of the input.
//
// Throws ContractError when m is not square or not symmetric within 1e-9 and
// NumericalError when the off-diagonal mass fails to vanish after
// kMaxJacobiSweeps sweeps.
EigenDecomposition symmetric_eigen(const Matrix& m);

// U diag(values) U^T.
Matrix reconstruct(const EigenDecomposition& eig);

}  // namespace rgcnn

#endif  // RGCNN_EIGENSOLVER_HPP_
