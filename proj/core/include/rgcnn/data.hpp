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

#ifndef RGCNN_DATA_HPP_
#define RGCNN_DATA_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rgcnn/pointcloud.hpp"

namespace rgcnn {

// Synthetic shape families used as a labeled stand-in for scanned parts
// datasets. Part labels are global across categories.
enum class ShapeCategory : int {
  kLollipop = 0,  // sphere on a stick: {0 head, 1 stick}
  kTable = 1,     // rectangular top on four legs: {2 top, 3 legs}
  kCapsule = 2,   // cylinder with hemispherical caps: {4 top cap, 5 body, 6 bottom cap}
  kDumbbell = 3,  // two spheres joined by a bar: {7 top bell, 8 bar, 9 bottom bell}
};

inline constexpr std::size_t kSyntheticCategoryCount = 4;
inline constexpr std::size_t kSyntheticPartCount = 10;

std::string_view category_name(ShapeCategory c);
// Accepts a name ("table") or a numeric id ("1"). Throws ContractError.
ShapeCategory parse_category(std::string_view text);
ShapeCategory category_from_id(int id);
// Global part labels belonging to a category, ascending.
std::vector<int> category_parts(ShapeCategory c);
std::vector<int> category_parts(int category_id);

struct SyntheticSpec {
  ShapeCategory category = ShapeCategory::kLollipop;
  std::size_t n_points = 1024;
  std::uint64_t seed = 0;
  // Relative jitter of each nominal primitive dimension.
  double shape_variation = 0.15;
  // Uniform scale range of the pose jitter.
  double scale_min = 0.8;
  double scale_max = 1.25;
  // Random rotation about the up (z) axis.
  bool rotate = true;
};

inline constexpr std::size_t kMinSyntheticPoints = 64;

struct SyntheticShape {
  PointCloud cloud;
  // Surface area per global part label (zero for labels of other
  // categories), after the pose scale.
  std::array<double, kSyntheticPartCount> part_area{};
};

// Points drawn uniformly over the composite surface (each point first picks a
// primitive with probability proportional to its area), with analytic unit
// normals and part labels. Deterministic for a given SyntheticSpec.
SyntheticShape generate_shape(const SyntheticSpec& spec);
PointCloud generate(const SyntheticSpec& spec);

// Text cloud format: one point per line, "x y z nx ny nz label"; '#' starts
// a comment line; label -1 marks an unlabeled point. A "# category: <id>"
// comment carries the shape category.
void write_cloud(const PointCloud& pc, const std::filesystem::path& path);
PointCloud read_cloud(const std::filesystem::path& path);
std::string format_cloud(const PointCloud& pc);
PointCloud parse_cloud(std::string_view text);

enum class Split { kTrain, kVal, kTest };
std::string_view split_name(Split s);
Split parse_split(std::string_view text);

struct ManifestEntry {
  std::filesystem::path path;
  int category = 0;
  Split split = Split::kTrain;
};

inline constexpr int kManifestVersion = 1;

// Text manifest: "path<TAB>category<TAB>split" per line, optional
// "# rgcnn-manifest v1" header. Relative paths resolve against the
// manifest's directory.
struct DatasetManifest {
  int version = kManifestVersion;
  std::vector<ManifestEntry> entries;

  std::vector<ManifestEntry> split(Split s) const;
};

// Throws ParseError on malformed lines or a path listed in two splits, and
// IoError when a listed file does not exist.
DatasetManifest read_manifest(const std::filesystem::path& path);
// Paths are written relative to the manifest's directory when possible.
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

struct DatasetSpec {
  std::size_t train = 200;
  std::size_t val = 40;
  std::size_t test = 40;
  std::size_t n_points = 256;
  std::uint64_t seed = 1;
};

// Generates a category-balanced synthetic dataset under `dir` (one file per
// cloud, split subdirectories) and returns the written manifest path.
std::filesystem::path generate_dataset(const DatasetSpec& spec, const std::filesystem::path& dir);

// SplitMix64 finalizer; derives independent stream seeds from one seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace rgcnn

#endif  // RGCNN_DATA_HPP_
