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

#ifndef RGCNN_TRAIN_CONFIG_HPP_
#define RGCNN_TRAIN_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace rgcnn {

enum class Task : std::uint32_t { kSegmentation = 0, kClassification = 1 };

std::string_view task_name(Task t);
Task parse_task(std::string_view text);

struct TrainConfig {
  Task task = Task::kSegmentation;
  std::size_t epochs = 100;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  // Clouds whose gradients are averaged per optimizer step.
  std::size_t batch_size = 8;
  double gamma = 1e-9;
  double beta = 1.0;
  std::uint64_t seed = 1;
  // Points drawn from each cloud before it enters the network.
  std::size_t n_points = 256;
  bool normalize = true;
  std::size_t log_interval = 1;
  std::string checkpoint;

  // Throws ContractError on epochs == 0, learning_rate <= 0, batch_size == 0,
  // n_points < 2, or out-of-range Adam constants.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

}  // namespace rgcnn

#endif  // RGCNN_TRAIN_CONFIG_HPP_
