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

#ifndef RGCNN_TRAINING_HPP_
#define RGCNN_TRAINING_HPP_

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rgcnn/data.hpp"
#include "rgcnn/loss.hpp"
#include "rgcnn/model.hpp"
#include "rgcnn/pointcloud.hpp"
#include "rgcnn/train_config.hpp"

namespace rgcnn {

// Draws n_points from the cloud (seeded) and optionally rescales it into the
// unit cube.
PointCloud prepare_cloud(const PointCloud& raw, std::size_t n_points, bool normalize,
                         std::uint64_t seed);

// Reads and prepares every cloud of a split. Cloud i of the manifest uses
// sampling seed mix_seed(seed, i), so a file always yields the same points.
// Categories come from the manifest.
std::vector<PointCloud> load_split(const DatasetManifest& manifest, Split split,
                                   std::size_t n_points, bool normalize, std::uint64_t seed);

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double total_loss = 0.0;
  double cross_entropy = 0.0;
  double smoothness = 0.0;  // sum over the three layers
  double train_accuracy = 0.0;
  // mIoU (segmentation) or top-1 accuracy (classification) on the
  // validation split; NaN when there is none.
  double val_metric = std::numeric_limits<double>::quiet_NaN();
};

std::string format_epoch_log(const EpochLog& log, std::size_t total_epochs);

struct TrainResult {
  RgcnnModel final_model;
  RgcnnModel best_model;  // best validation metric; final model without validation
  std::vector<EpochLog> history;
  double best_val_metric = std::numeric_limits<double>::quiet_NaN();
};

// Model architecture for a training run on the synthetic label space.
// `preset` is "desk" or "full".
RgcnnConfig model_config_for(const std::string& preset, const TrainConfig& train);

// Adam over shuffled training clouds, gradients averaged over batch_size
// clouds per step. The loss is the task cross entropy plus gamma times the
// per-layer smoothness of the three layer outputs. Deterministic for a
// fixed configuration. The callback sees each finished epoch.
TrainResult train(RgcnnModel model, const TrainConfig& config, std::span<const PointCloud> train_set,
                  std::span<const PointCloud> val_set,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

struct CategoryMetrics {
  int category = 0;
  std::size_t shapes = 0;
  double miou = 0.0;      // mean over shapes of the per-shape mIoU
  double accuracy = 0.0;  // per-point (segmentation) or top-1 (classification)
};

struct EvalReport {
  Task task = Task::kSegmentation;
  std::size_t shapes = 0;
  double accuracy = 0.0;    // per-point overall (seg) or top-1 overall (cls)
  double mean_class_accuracy = 0.0;  // classification only
  double miou = std::numeric_limits<double>::quiet_NaN();  // instance-averaged; seg only
  std::vector<CategoryMetrics> per_category;
};

// Part predictions for one cloud. With a known category the argmax is taken
// over that category's part labels only.
std::vector<int> predict_parts(const RgcnnModel& model, const PointCloud& pc);

EvalReport evaluate(const RgcnnModel& model, Task task, std::span<const PointCloud> clouds);

enum class Sweep { kNoise, kDensity };
std::string_view sweep_name(Sweep s);
Sweep parse_sweep(std::string_view text);

// Grids used unless the caller supplies values.
std::vector<double> default_sweep_values(Sweep s);

struct ExperimentRow {
  Sweep sweep = Sweep::kNoise;
  double value = 0.0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double miou = std::numeric_limits<double>::quiet_NaN();
};

// Perturbs every cloud (Gaussian jitter of sigma = value, or random drop of
// ratio = value) with seed mix_seed(seed, cloud index) and evaluates. A
// zero-value row is always present first, per seed. Values must lie in
// [0, 0.5] (noise) or [0, 0.95] (density).
std::vector<ExperimentRow> robustness_sweep(const RgcnnModel& model, Task task,
                                            std::span<const PointCloud> clouds, Sweep sweep,
                                            std::vector<double> values,
                                            std::span<const std::uint64_t> seeds);

// "sweep_name,value,seed,accuracy,miou" header plus one line per row.
std::string format_experiment_csv(std::span<const ExperimentRow> rows);

}  // namespace rgcnn

#endif  // RGCNN_TRAINING_HPP_
