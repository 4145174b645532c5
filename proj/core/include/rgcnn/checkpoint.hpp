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

#ifndef RGCNN_CHECKPOINT_HPP_
#define RGCNN_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "rgcnn/model.hpp"
#include "rgcnn/train_config.hpp"

namespace rgcnn {

inline constexpr char kCheckpointMagic[4] = {'R', 'G', 'C', 'N'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  RgcnnModel model;
  TrainConfig train;
};

// Little-endian binary layout:
//
//   "RGCN" | u32 version
//   model config: u32 input width, 3 x u32 orders, 3 x u32 feature widths,
//     u32 count + u32 dims (segmentation head), u32 count + u32 dims
//     (classification head), u32 category conditioning, f64 beta,
//     f64 gamma, u64 seed
//   train config: u32 task, u32 epochs, f64 learning rate, f64 beta1,
//     f64 beta2, f64 epsilon, u32 batch size, f64 gamma, f64 beta,
//     u64 seed, u32 points, u32 normalize, u32 log interval
//   u32 parameter count, then per parameter in declaration order:
//     u32 rank, rank x u64 dims, f64 values (row-major)
std::string serialize_checkpoint(const RgcnnModel& model, const TrainConfig& train);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const RgcnnModel& model,
                     const TrainConfig& train);

// Throws FormatError on bad magic, VersionError on an unknown version,
// TruncatedFileError when the file ends early and ShapeError when a
// parameter blob disagrees with the header's architecture.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// As load_checkpoint, then requires the stored architecture to equal
// `expected`; a mismatch raises ShapeError naming the first differing layer.
Checkpoint load_checkpoint(const std::filesystem::path& path, const RgcnnConfig& expected);

}  // namespace rgcnn

#endif  // RGCNN_CHECKPOINT_HPP_
