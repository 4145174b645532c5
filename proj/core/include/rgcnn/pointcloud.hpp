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

#ifndef RGCNN_POINTCLOUD_HPP_
#define RGCNN_POINTCLOUD_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rgcnn/matrix.hpp"

namespace rgcnn {

inline constexpr std::size_t kPointFeatureWidth = 6;  // x y z nx ny nz

// An unordered point set. Each feature row is (x, y, z, nx, ny, nz).
struct PointCloud {
  Matrix features;
  // Per-point part labels; empty when the cloud is unlabeled.
  std::vector<int> labels;
  std::optional<int> category;
  bool has_normals = true;

  std::size_t size() const { return features.rows(); }
  bool labeled() const { return !labels.empty(); }
};

// Checks the data-model invariants: 6-wide rows, at least `min_points`
// points, finite values, unit normals within 1e-6 (when has_normals) and
// labels in [0, label_count) when label_count > 0. Throws ContractError.
void validate(const PointCloud& pc, int label_count = 0, std::size_t min_points = 2);

// Subset (or resampling) of pc by point index; labels follow their points.
PointCloud select_points(const PointCloud& pc, std::span<const std::size_t> indices);

// Indices used by random_sample. Without replacement when n_target <= n,
// i.i.d. uniform with replacement otherwise.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t n_target, std::uint64_t seed);

PointCloud random_sample(const PointCloud& pc, std::size_t n_target, std::uint64_t seed);

// Shifts and uniformly scales coordinates so the bounding box sits in
// [0,1]^3 with its longest side spanning exactly [0,1]. Normals are left
// alone. Throws DegenerateInputError when all points coincide.
PointCloud normalize_unit_cube(const PointCloud& pc);

// Adds i.i.d. N(0, sigma^2) noise to coordinates only.
PointCloud jitter_gaussian(const PointCloud& pc, double sigma, std::uint64_t seed);

// Removes round(missing_ratio * n) uniformly chosen points; survivors keep
// their original order.
PointCloud drop_points(const PointCloud& pc, double missing_ratio, std::uint64_t seed);

}  // namespace rgcnn

#endif  // RGCNN_POINTCLOUD_HPP_
