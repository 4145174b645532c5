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

#include "rgcnn/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "rgcnn/errors.hpp"

namespace rgcnn {

void validate(const PointCloud& pc, int label_count, std::size_t min_points) {
  const Matrix& f = pc.features;
  if (f.cols() != kPointFeatureWidth) {
    throw ShapeError("point cloud must have 6 feature columns, got " + std::to_string(f.cols()));
  }
  if (f.rows() < min_points) {
    throw ContractError("point cloud has " + std::to_string(f.rows()) +
                        " points, need at least " + std::to_string(min_points));
  }
  if (!f.all_finite()) throw ContractError("point cloud has non-finite features");
  if (pc.has_normals) {
    for (std::size_t i = 0; i < f.rows(); ++i) {
      const double norm = std::sqrt(f(i, 3) * f(i, 3) + f(i, 4) * f(i, 4) + f(i, 5) * f(i, 5));
      if (std::abs(norm - 1.0) > 1e-6) {
        throw ContractError("point " + std::to_string(i) + " has non-unit normal (norm " +
                            std::to_string(norm) + ")");
      }
    }
  }
  if (pc.labeled()) {
    if (pc.labels.size() != f.rows()) {
      throw ShapeError("label count " + std::to_string(pc.labels.size()) +
                       " does not match point count " + std::to_string(f.rows()));
    }
    for (std::size_t i = 0; i < pc.labels.size(); ++i) {
      const int l = pc.labels[i];
      if (l < 0 || (label_count > 0 && l >= label_count)) {
        throw ContractError("point " + std::to_string(i) + " has label " + std::to_string(l) +
                            " outside [0, " + std::to_string(label_count) + ")");
      }
    }
  }
}

PointCloud select_points(const PointCloud& pc, std::span<const std::size_t> indices) {
  PointCloud out;
  out.features = gather_rows(pc.features, indices);
  out.category = pc.category;
  out.has_normals = pc.has_normals;
  if (pc.labeled()) {
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) out.labels.push_back(pc.labels.at(i));
  }
  return out;
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t n_target, std::uint64_t seed) {
  if (n_target == 0) throw ContractError("random_sample: n_target must be positive");
  if (n == 0) throw ContractError("random_sample: empty point cloud");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> idx;
  if (n_target <= n) {
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates: the first n_target slots are a uniform sample.
    for (std::size_t i = 0; i < n_target; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(n_target);
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    idx.reserve(n_target);
    for (std::size_t i = 0; i < n_target; ++i) idx.push_back(pick(rng));
  }
  return idx;
}

PointCloud random_sample(const PointCloud& pc, std::size_t n_target, std::uint64_t seed) {
  const auto idx = sample_indices(pc.size(), n_target, seed);
  return select_points(pc, idx);
}

PointCloud normalize_unit_cube(const PointCloud& pc) {
  const Matrix& f = pc.features;
  if (f.cols() < 3 || f.rows() == 0) throw ShapeError("normalize_unit_cube: no coordinates");
  double lo[3];
  double hi[3];
  for (int a = 0; a < 3; ++a) {
    lo[a] = std::numeric_limits<double>::infinity();
    hi[a] = -std::numeric_limits<double>::infinity();
  }
  for (std::size_t i = 0; i < f.rows(); ++i) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], f(i, a));
      hi[a] = std::max(hi[a], f(i, a));
    }
  }
  const double extent = std::max({hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]});
  if (!(extent > 0.0)) throw DegenerateInputError("normalize_unit_cube: all points coincide");
  PointCloud out = pc;
  for (std::size_t i = 0; i < f.rows(); ++i) {
    for (int a = 0; a < 3; ++a) out.features(i, a) = (f(i, a) - lo[a]) / extent;
  }
  return out;
}

PointCloud jitter_gaussian(const PointCloud& pc, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ContractError("jitter_gaussian: sigma must be non-negative");
  PointCloud out = pc;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (int a = 0; a < 3; ++a) out.features(i, a) += noise(rng);
  }
  return out;
}

PointCloud drop_points(const PointCloud& pc, double missing_ratio, std::uint64_t seed) {
  if (!(missing_ratio >= 0.0) || missing_ratio >= 1.0) {
    throw ContractError("drop_points: missing ratio must lie in [0, 1)");
  }
  const std::size_t n = pc.size();
  const auto drop = static_cast<std::size_t>(std::llround(missing_ratio * static_cast<double>(n)));
  if (drop == 0) return pc;
  if (n - drop < 2) {
    throw ContractError("drop_points: fewer than 2 points would remain");
  }
  auto keep = sample_indices(n, n - drop, seed);
  std::sort(keep.begin(), keep.end());
  return select_points(pc, keep);
}

}  // namespace rgcnn
