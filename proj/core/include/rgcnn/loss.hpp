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

#ifndef RGCNN_LOSS_HPP_
#define RGCNN_LOSS_HPP_

#include <array>
#include <span>
#include <vector>

#include "rgcnn/model.hpp"
#include "rgcnn/tape.hpp"

namespace rgcnn {

// Mean over rows of -log softmax(scores_i)[labels_i], computed with the
// row max subtracted. Throws ContractError on labels outside [0, cols) and
// ShapeError when labels.size() != rows.
Var cross_entropy(Var scores, std::span<const int> labels);
double cross_entropy(const Matrix& scores, std::span<const int> labels);

struct LossBreakdown {
  double cross_entropy = 0.0;
  std::array<double, kConvLayers> smoothness{};
  double total = 0.0;

  double smoothness_sum() const { return smoothness[0] + smoothness[1] + smoothness[2]; }
};

struct LossTerms {
  Var total;  // 1x1 node to call Tape::backward on
  LossBreakdown values;
};

// Cross entropy of the record's scores plus gamma times the sum of
// trace(y_l^T L_l y_l) over the three layers, each with the Laplacian that
// layer actually used.
LossTerms total_loss(const ForwardRecord& record, std::span<const int> labels, double gamma);

// Mean IoU over label_set. A label absent from both prediction and truth
// scores 1. Throws ContractError on empty label_set or length mismatch.
double miou(std::span<const int> predicted, std::span<const int> truth,
            std::span<const int> label_set);

struct AccuracyReport {
  double overall = 0.0;
  double mean_class = 0.0;  // unweighted mean of per-class recall over classes present in truth
};

AccuracyReport accuracy(std::span<const int> predicted, std::span<const int> truth);

}  // namespace rgcnn

#endif  // RGCNN_LOSS_HPP_
