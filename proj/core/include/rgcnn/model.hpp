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

#ifndef RGCNN_MODEL_HPP_
#define RGCNN_MODEL_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rgcnn/chebconv.hpp"
#include "rgcnn/matrix.hpp"
#include "rgcnn/pointcloud.hpp"
#include "rgcnn/tape.hpp"

namespace rgcnn {

inline constexpr std::size_t kConvLayers = 3;

struct RgcnnConfig {
  std::size_t input_features = kPointFeatureWidth;
  std::array<std::size_t, kConvLayers> cheb_orders{6, 5, 3};
  std::array<std::size_t, kConvLayers> feature_dims{128, 512, 1024};
  // Per-point head; the last entry is the number of part labels.
  std::vector<std::size_t> seg_mlp_dims{512, 192, 50};
  // Head after global max pooling; the last entry is the number of categories.
  std::vector<std::size_t> cls_mlp_dims{512, 192, 40};
  // Width of the one-hot category code appended to the concatenated
  // features before the segmentation head; 0 disables conditioning.
  std::size_t category_conditioning = 0;
  double beta = 1.0;
  double gamma = 1e-9;
  std::uint64_t seed = 0;

  std::size_t part_count() const { return seg_mlp_dims.back(); }
  std::size_t category_count() const { return cls_mlp_dims.back(); }

  // Throws ContractError on empty heads, zero widths or orders, beta <= 0
  // or gamma < 0.
  void validate() const;

  friend bool operator==(const RgcnnConfig&, const RgcnnConfig&) = default;
};

// Full-size network: K = (6,5,3), F = (128,512,1024), MLP (512,192,parts).
RgcnnConfig full_config(std::size_t part_count = 50, std::size_t category_count = 40);
// Narrow network for desk-scale runs: F = (32,64,128), heads (256,128,*).
RgcnnConfig desk_config(std::size_t part_count, std::size_t category_count);

struct DenseLayer {
  Matrix weight;  // in x out
  Matrix bias;    // 1 x out
};

// Three dynamic-graph Chebyshev layers with a per-point segmentation head
// over the concatenated layer outputs and a classification head over their
// global max-pool.
class RgcnnModel {
 public:
  // Parameters are drawn from config.seed.
  explicit RgcnnModel(RgcnnConfig config);

  const RgcnnConfig& config() const { return config_; }
  const std::array<ChebLayer, kConvLayers>& layers() const { return layers_; }
  std::array<ChebLayer, kConvLayers>& layers() { return layers_; }
  const std::vector<DenseLayer>& seg_head() const { return seg_head_; }
  const std::vector<DenseLayer>& cls_head() const { return cls_head_; }

  std::size_t seg_input_width() const;

  // Every trainable matrix in declaration order: per conv layer theta_0 ..
  // theta_{K-1} then bias; then segmentation head (weight, bias) pairs; then
  // classification head pairs.
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
  // Human-readable names, aligned with parameters().
  std::vector<std::string> parameter_names() const;
  std::size_t parameter_count() const;

 private:
  RgcnnConfig config_;
  std::array<ChebLayer, kConvLayers> layers_;
  std::vector<DenseLayer> seg_head_;
  std::vector<DenseLayer> cls_head_;
};

// Tape nodes produced by one forward pass.
struct ForwardRecord {
  std::array<Var, kConvLayers> features;    // post-ReLU layer outputs y_0..y_2
  std::array<Var, kConvLayers> laplacians;  // normalized Laplacian used by each layer
  Var scores;                               // n x parts or 1 x categories
  std::vector<Var> parameters;              // aligned with RgcnnModel::parameters()
};

// Per-point part scores (raw logits). Each layer rebuilds its graph from its
// own input features; gradients do not flow through the Laplacians.
ForwardRecord forward_segmentation(Tape& tape, const RgcnnModel& model, const PointCloud& pc);
// Category scores (raw logits), 1 x categories.
ForwardRecord forward_classification(Tape& tape, const RgcnnModel& model, const PointCloud& pc);

// Variants that reuse the given per-layer Laplacians instead of rebuilding
// them. With the Laplacians of an earlier pass this evaluates exactly the
// function whose gradient backward computes.
using LayerLaplacians = std::array<Matrix, kConvLayers>;
ForwardRecord forward_segmentation(Tape& tape, const RgcnnModel& model, const PointCloud& pc,
                                   const LayerLaplacians& laplacians);
ForwardRecord forward_classification(Tape& tape, const RgcnnModel& model, const PointCloud& pc,
                                     const LayerLaplacians& laplacians);

Matrix segmentation_scores(const RgcnnModel& model, const PointCloud& pc);
Matrix classification_scores(const RgcnnModel& model, const PointCloud& pc);

// Index of the largest entry of each row, first on ties.
std::vector<int> argmax_rows(const Matrix& scores);

}  // namespace rgcnn

#endif  // RGCNN_MODEL_HPP_
