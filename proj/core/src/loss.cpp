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

#include "rgcnn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "rgcnn/errors.hpp"
#include "rgcnn/graph.hpp"

namespace rgcnn {
namespace {

void check_labels(const Matrix& scores, std::span<const int> labels) {
  if (labels.size() != scores.rows()) {
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(scores.rows()) + " score rows");
  }
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= scores.cols()) {
      throw ContractError("cross_entropy: label " + std::to_string(l) + " outside [0, " +
                          std::to_string(scores.cols()) + ")");
    }
  }
}

// Row-wise softmax probabilities and the mean negative log-likelihood.
double softmax_nll(const Matrix& scores, std::span<const int> labels, Matrix* probs) {
  double total = 0.0;
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    auto row = scores.row(r);
    const double m = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - m);
    const double log_z = std::log(z);
    total += -(row[static_cast<std::size_t>(labels[r])] - m - log_z);
    if (probs != nullptr) {
      auto p = probs->row(r);
      for (std::size_t c = 0; c < row.size(); ++c) p[c] = std::exp(row[c] - m - log_z);
    }
  }
  return total / static_cast<double>(scores.rows());
}

}  // namespace

double cross_entropy(const Matrix& scores, std::span<const int> labels) {
  check_labels(scores, labels);
  return softmax_nll(scores, labels, nullptr);
}

Var cross_entropy(Var scores, std::span<const int> labels) {
  const Matrix& s = scores.value();
  check_labels(s, labels);
  Matrix probs(s.rows(), s.cols());
  const double value = softmax_nll(s, labels, &probs);
  const std::size_t is = scores.id();
  std::vector<int> owned(labels.begin(), labels.end());
  return scores.tape().record(
      Matrix(1, 1, value), {is},
      [is, probs = std::move(probs), owned = std::move(owned)](Tape& tape, const Matrix& g,
                                                                const Matrix&) {
        // d/ds mean(-log softmax) = (softmax - onehot) / n
        Matrix gs = probs;
        const double w = g(0, 0) / static_cast<double>(gs.rows());
        for (std::size_t r = 0; r < gs.rows(); ++r) {
          gs(r, static_cast<std::size_t>(owned[r])) -= 1.0;
          for (double& v : gs.row(r)) v *= w;
        }
        tape.accumulate(is, std::move(gs));
      });
}

LossTerms total_loss(const ForwardRecord& record, std::span<const int> labels, double gamma) {
  if (!record.scores.valid()) throw ContractError("total_loss: record has no scores");
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    if (!record.features[l].valid() || !record.laplacians[l].valid()) {
      throw ContractError("total_loss: missing layer " + std::to_string(l) + " record");
    }
  }
  if (!(gamma >= 0.0)) throw ContractError("total_loss: gamma must be non-negative");

  LossTerms out;
  Var ce = cross_entropy(record.scores, labels);
  out.values.cross_entropy = ce.value()(0, 0);
  Var total = ce;
  if (gamma > 0.0) {
    Var reg;
    for (std::size_t l = 0; l < kConvLayers; ++l) {
      Var s = smoothness_quadratic(record.laplacians[l], record.features[l]);
      out.values.smoothness[l] = s.value()(0, 0);
      reg = l == 0 ? s : add(reg, s);
    }
    total = add(ce, scale(reg, gamma));
  } else {
    for (std::size_t l = 0; l < kConvLayers; ++l) {
      out.values.smoothness[l] =
          smoothness_quadratic(record.laplacians[l].value(), record.features[l].value());
    }
  }
  out.total = total;
  out.values.total = total.value()(0, 0);
  return out;
}

double miou(std::span<const int> predicted, std::span<const int> truth,
            std::span<const int> label_set) {
  if (label_set.empty()) throw ContractError("miou: empty label set");
  if (predicted.size() != truth.size()) throw ContractError("miou: length mismatch");
  double acc = 0.0;
  for (int label : label_set) {
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool p = predicted[i] == label;
      const bool t = truth[i] == label;
      inter += (p && t) ? 1 : 0;
      uni += (p || t) ? 1 : 0;
    }
    acc += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  }
  return acc / static_cast<double>(label_set.size());
}

AccuracyReport accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw ContractError("accuracy: length mismatch");
  if (truth.empty()) throw ContractError("accuracy: empty input");
  std::map<int, std::pair<std::size_t, std::size_t>> per_class;  // correct, total
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    auto& [ok, total] = per_class[truth[i]];
    ++total;
    if (predicted[i] == truth[i]) {
      ++ok;
      ++correct;
    }
  }
  AccuracyReport r;
  r.overall = static_cast<double>(correct) / static_cast<double>(truth.size());
  for (const auto& [label, counts] : per_class) {
    r.mean_class += static_cast<double>(counts.first) / static_cast<double>(counts.second);
  }
  r.mean_class /= static_cast<double>(per_class.size());
  return r;
}

}  // namespace rgcnn
