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

#include "rgcnn/model.hpp"

#include <cmath>
#include <random>
#include <utility>

#include "rgcnn/errors.hpp"
#include "rgcnn/graph.hpp"

namespace rgcnn {
namespace {

std::vector<DenseLayer> make_head(std::size_t in, const std::vector<std::size_t>& dims,
                                  std::mt19937_64& rng) {
  std::vector<DenseLayer> head;
  for (std::size_t out : dims) {
    const double s = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-s, s);
    DenseLayer layer{Matrix(in, out), Matrix(1, out)};
    for (double& v : layer.weight.data()) v = dist(rng);
    head.push_back(std::move(layer));
    in = out;
  }
  return head;
}

// ReLU between layers, raw output after the last one.
Var run_head(Var x, std::span<const Var> params) {
  const std::size_t layers = params.size() / 2;
  for (std::size_t i = 0; i < layers; ++i) {
    x = add_bias(matmul(x, params[2 * i]), params[2 * i + 1]);
    if (i + 1 < layers) x = relu(x);
  }
  return x;
}

struct Trunk {
  ForwardRecord record;
  std::size_t seg_offset = 0;  // index of first seg-head parameter
  std::size_t cls_offset = 0;
};

Trunk run_trunk(Tape& tape, const RgcnnModel& model, const PointCloud& pc,
                const LayerLaplacians* fixed) {
  const RgcnnConfig& cfg = model.config();
  if (pc.features.cols() != cfg.input_features) {
    throw ShapeError("model expects " + std::to_string(cfg.input_features) +
                     " input features, cloud has " + std::to_string(pc.features.cols()));
  }
  if (pc.size() < 2) throw ContractError("model needs at least 2 points");

  Trunk trunk;
  ForwardRecord& rec = trunk.record;
  for (const Matrix* p : model.parameters()) rec.parameters.push_back(tape.parameter(*p));

  std::size_t offset = 0;
  Var x = tape.constant(pc.features);
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    const ChebLayer& layer = model.layers()[l];
    ChebLayerVars vars;
    vars.theta.assign(rec.parameters.begin() + static_cast<std::ptrdiff_t>(offset),
                      rec.parameters.begin() + static_cast<std::ptrdiff_t>(offset + layer.order));
    vars.bias = rec.parameters[offset + layer.order];
    offset += layer.order + 1;

    if (fixed != nullptr) {
      if ((*fixed)[l].rows() != pc.size() || (*fixed)[l].cols() != pc.size()) {
        throw ShapeError("fixed Laplacian " + std::to_string(l + 1) + " does not match cloud size");
      }
      rec.laplacians[l] = tape.constant((*fixed)[l]);
    } else {
      rec.laplacians[l] = tape.constant(normalized_laplacian(x.value(), cfg.beta));
    }
    x = cheb_forward(layer, vars, rec.laplacians[l], x);
    rec.features[l] = x;
  }
  trunk.seg_offset = offset;
  trunk.cls_offset = offset + 2 * model.seg_head().size();
  return trunk;
}

ForwardRecord segmentation_impl(Tape& tape, const RgcnnModel& model, const PointCloud& pc,
                                const LayerLaplacians* fixed) {
  Trunk trunk = run_trunk(tape, model, pc, fixed);
  ForwardRecord& rec = trunk.record;
  const RgcnnConfig& cfg = model.config();

  std::vector<Var> parts(rec.features.begin(), rec.features.end());
  if (cfg.category_conditioning > 0) {
    if (!pc.category || *pc.category < 0 ||
        static_cast<std::size_t>(*pc.category) >= cfg.category_conditioning) {
      throw ContractError("category-conditioned model needs a valid cloud category");
    }
    Matrix onehot(pc.size(), cfg.category_conditioning);
    for (std::size_t i = 0; i < pc.size(); ++i) {
      onehot(i, static_cast<std::size_t>(*pc.category)) = 1.0;
    }
    parts.push_back(tape.constant(std::move(onehot)));
  }
  const Var concat = concat_cols(parts);
  const std::span<const Var> head(rec.parameters.data() + trunk.seg_offset,
                                  2 * model.seg_head().size());
  rec.scores = run_head(concat, head);
  return std::move(trunk.record);
}

ForwardRecord classification_impl(Tape& tape, const RgcnnModel& model, const PointCloud& pc,
                                  const LayerLaplacians* fixed) {
  Trunk trunk = run_trunk(tape, model, pc, fixed);
  ForwardRecord& rec = trunk.record;
  const Var pooled = row_max_pool(rec.features.back());
  const std::span<const Var> head(rec.parameters.data() + trunk.cls_offset,
                                  2 * model.cls_head().size());
  rec.scores = run_head(pooled, head);
  return std::move(trunk.record);
}

}  // namespace

void RgcnnConfig::validate() const {
  if (input_features == 0) throw ContractError("config: input width must be positive");
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    if (cheb_orders[l] == 0) throw ContractError("config: Chebyshev order must be >= 1");
    if (feature_dims[l] == 0) throw ContractError("config: feature width must be positive");
  }
  if (seg_mlp_dims.empty() || cls_mlp_dims.empty()) {
    throw ContractError("config: MLP heads need at least one layer");
  }
  for (std::size_t d : seg_mlp_dims) {
    if (d == 0) throw ContractError("config: segmentation head width must be positive");
  }
  for (std::size_t d : cls_mlp_dims) {
    if (d == 0) throw ContractError("config: classification head width must be positive");
  }
  if (!(beta > 0.0)) throw ContractError("config: beta must be positive");
  if (!(gamma >= 0.0)) throw ContractError("config: gamma must be non-negative");
}

RgcnnConfig full_config(std::size_t part_count, std::size_t category_count) {
  RgcnnConfig cfg;
  cfg.seg_mlp_dims = {512, 192, part_count};
  cfg.cls_mlp_dims = {512, 192, category_count};
  return cfg;
}

RgcnnConfig desk_config(std::size_t part_count, std::size_t category_count) {
  RgcnnConfig cfg;
  cfg.feature_dims = {32, 64, 128};
  cfg.seg_mlp_dims = {256, 128, part_count};
  cfg.cls_mlp_dims = {256, 128, category_count};
  return cfg;
}

RgcnnModel::RgcnnModel(RgcnnConfig config) : config_(std::move(config)) {
  config_.validate();
  std::mt19937_64 rng(config_.seed);
  std::size_t in = config_.input_features;
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    layers_[l] = ChebLayer::initialized(config_.cheb_orders[l], in, config_.feature_dims[l], rng);
    in = config_.feature_dims[l];
  }
  seg_head_ = make_head(seg_input_width(), config_.seg_mlp_dims, rng);
  cls_head_ = make_head(config_.feature_dims.back(), config_.cls_mlp_dims, rng);
}

std::size_t RgcnnModel::seg_input_width() const {
  std::size_t w = config_.category_conditioning;
  for (std::size_t d : config_.feature_dims) w += d;
  return w;
}

std::vector<Matrix*> RgcnnModel::parameters() {
  std::vector<Matrix*> out;
  for (ChebLayer& layer : layers_) {
    for (Matrix& t : layer.theta) out.push_back(&t);
    out.push_back(&layer.bias);
  }
  for (auto* head : {&seg_head_, &cls_head_}) {
    for (DenseLayer& d : *head) {
      out.push_back(&d.weight);
      out.push_back(&d.bias);
    }
  }
  return out;
}

std::vector<const Matrix*> RgcnnModel::parameters() const {
  auto mutable_params = const_cast<RgcnnModel*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

std::vector<std::string> RgcnnModel::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    const std::string prefix = "conv" + std::to_string(l + 1);
    for (std::size_t k = 0; k < layers_[l].order; ++k) {
      names.push_back(prefix + ".theta" + std::to_string(k));
    }
    names.push_back(prefix + ".bias");
  }
  for (std::size_t i = 0; i < seg_head_.size(); ++i) {
    names.push_back("seg_mlp" + std::to_string(i + 1) + ".weight");
    names.push_back("seg_mlp" + std::to_string(i + 1) + ".bias");
  }
  for (std::size_t i = 0; i < cls_head_.size(); ++i) {
    names.push_back("cls_mlp" + std::to_string(i + 1) + ".weight");
    names.push_back("cls_mlp" + std::to_string(i + 1) + ".bias");
  }
  return names;
}

std::size_t RgcnnModel::parameter_count() const {
  std::size_t n = 0;
  for (const Matrix* p : parameters()) n += p->size();
  return n;
}

ForwardRecord forward_segmentation(Tape& tape, const RgcnnModel& model, const PointCloud& pc) {
  return segmentation_impl(tape, model, pc, nullptr);
}

ForwardRecord forward_segmentation(Tape& tape, const RgcnnModel& model, const PointCloud& pc,
                                   const LayerLaplacians& laplacians) {
  return segmentation_impl(tape, model, pc, &laplacians);
}

ForwardRecord forward_classification(Tape& tape, const RgcnnModel& model, const PointCloud& pc) {
  return classification_impl(tape, model, pc, nullptr);
}

ForwardRecord forward_classification(Tape& tape, const RgcnnModel& model, const PointCloud& pc,
                                     const LayerLaplacians& laplacians) {
  return classification_impl(tape, model, pc, &laplacians);
}

Matrix segmentation_scores(const RgcnnModel& model, const PointCloud& pc) {
  Tape tape;
  return forward_segmentation(tape, model, pc).scores.value();
}

Matrix classification_scores(const RgcnnModel& model, const PointCloud& pc) {
  Tape tape;
  return forward_classification(tape, model, pc).scores.value();
}

std::vector<int> argmax_rows(const Matrix& scores) {
  std::vector<int> out(scores.rows(), 0);
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    auto row = scores.row(r);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] > row[best]) best = c;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

}  // namespace rgcnn
