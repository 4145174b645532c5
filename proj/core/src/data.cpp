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

#include "rgcnn/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <system_error>

#include "rgcnn/errors.hpp"

namespace rgcnn {
namespace {

constexpr double kPi = std::numbers::pi;

struct Vec3 {
  double x, y, z;
};

enum class Surface { kSphere, kUpperHemisphere, kLowerHemisphere, kCylinder, kRectangle };

// Axis-aligned (z-up) surface primitive.
struct Primitive {
  Surface surface;
  Vec3 center;      // sphere center, cylinder base center, rectangle center
  double radius = 0.0;
  double height = 0.0;  // cylinder
  double width = 0.0;   // rectangle, x extent
  double depth = 0.0;   // rectangle, y extent
  int label = 0;

  double area() const {
    switch (surface) {
      case Surface::kSphere:
        return 4.0 * kPi * radius * radius;
      case Surface::kUpperHemisphere:
      case Surface::kLowerHemisphere:
        return 2.0 * kPi * radius * radius;
      case Surface::kCylinder:
        return 2.0 * kPi * radius * height;
      case Surface::kRectangle:
        return width * depth;
    }
    return 0.0;
  }
};

Vec3 unit_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    const Vec3 v{g(rng), g(rng), g(rng)};
    const double n = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
    if (n > 1e-12) return {v.x / n, v.y / n, v.z / n};
  }
}

// Uniform sample on the primitive: position and outward unit normal.
std::pair<Vec3, Vec3> sample_surface(const Primitive& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  switch (p.surface) {
    case Surface::kSphere:
    case Surface::kUpperHemisphere:
    case Surface::kLowerHemisphere: {
      Vec3 u = unit_direction(rng);
      if (p.surface == Surface::kUpperHemisphere) u.z = std::abs(u.z);
      if (p.surface == Surface::kLowerHemisphere) u.z = -std::abs(u.z);
      return {{p.center.x + p.radius * u.x, p.center.y + p.radius * u.y,
               p.center.z + p.radius * u.z},
              u};
    }
    case Surface::kCylinder: {
      const double phi = 2.0 * kPi * unit(rng);
      const double z = p.height * unit(rng);
      const double c = std::cos(phi);
      const double s = std::sin(phi);
      return {{p.center.x + p.radius * c, p.center.y + p.radius * s, p.center.z + z},
              {c, s, 0.0}};
    }
    case Surface::kRectangle: {
      const double x = (unit(rng) - 0.5) * p.width;
      const double y = (unit(rng) - 0.5) * p.depth;
      return {{p.center.x + x, p.center.y + y, p.center.z}, {0.0, 0.0, 1.0}};
    }
  }
  throw ContractError("unknown surface");
}

std::vector<Primitive> build_primitives(ShapeCategory category, double variation,
                                        std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(1.0 - variation, 1.0 + variation);
  auto vary = [&](double nominal) { return variation > 0.0 ? nominal * jitter(rng) : nominal; };

  std::vector<Primitive> parts;
  switch (category) {
    case ShapeCategory::kLollipop: {
      const double head_r = vary(0.5);
      const double stick_len = vary(1.5);
      const double stick_r = vary(0.06);
      parts.push_back({Surface::kSphere, {0, 0, stick_len + head_r}, head_r, 0, 0, 0, 0});
      parts.push_back({Surface::kCylinder, {0, 0, 0}, stick_r, stick_len, 0, 0, 1});
      break;
    }
    case ShapeCategory::kTable: {
      const double width = vary(1.6);
      const double depth = vary(1.0);
      const double height = vary(0.9);
      const double leg_r = vary(0.05);
      const double inset = 0.1;
      parts.push_back({Surface::kRectangle, {0, 0, height}, 0, 0, width, depth, 2});
      for (double sx : {-1.0, 1.0}) {
        for (double sy : {-1.0, 1.0}) {
          parts.push_back({Surface::kCylinder,
                           {sx * (width / 2 - inset), sy * (depth / 2 - inset), 0},
                           leg_r, height, 0, 0, 3});
        }
      }
      break;
    }
    case ShapeCategory::kCapsule: {
      const double r = vary(0.35);
      const double body = vary(1.2);
      parts.push_back({Surface::kUpperHemisphere, {0, 0, body}, r, 0, 0, 0, 4});
      parts.push_back({Surface::kCylinder, {0, 0, 0}, r, body, 0, 0, 5});
      parts.push_back({Surface::kLowerHemisphere, {0, 0, 0}, r, 0, 0, 0, 6});
      break;
    }
    case ShapeCategory::kDumbbell: {
      const double bell_r = vary(0.4);
      const double span = vary(1.6);
      const double bar_r = vary(0.08);
      // The bar runs between the points where it meets the two spheres.
      const double embed = std::sqrt(bell_r * bell_r - bar_r * bar_r);
      parts.push_back({Surface::kSphere, {0, 0, span}, bell_r, 0, 0, 0, 7});
      parts.push_back({Surface::kCylinder, {0, 0, embed}, bar_r, span - 2 * embed, 0, 0, 8});
      parts.push_back({Surface::kSphere, {0, 0, 0}, bell_r, 0, 0, 0, 9});
      break;
    }
  }
  return parts;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw ParseError("invalid number '" + std::string(tok) + "'", line);
  }
  return v;
}

int parse_int(std::string_view tok, std::size_t line) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError("invalid integer '" + std::string(tok) + "'", line);
  }
  return v;
}

void append_double(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::string_view category_name(ShapeCategory c) {
  switch (c) {
    case ShapeCategory::kLollipop:
      return "lollipop";
    case ShapeCategory::kTable:
      return "table";
    case ShapeCategory::kCapsule:
      return "capsule";
    case ShapeCategory::kDumbbell:
      return "dumbbell";
  }
  return "unknown";
}

ShapeCategory category_from_id(int id) {
  if (id < 0 || id >= static_cast<int>(kSyntheticCategoryCount)) {
    throw ContractError("invalid category id " + std::to_string(id));
  }
  return static_cast<ShapeCategory>(id);
}

ShapeCategory parse_category(std::string_view text) {
  for (int id = 0; id < static_cast<int>(kSyntheticCategoryCount); ++id) {
    if (category_name(static_cast<ShapeCategory>(id)) == text) return static_cast<ShapeCategory>(id);
  }
  int id = -1;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), id);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ContractError("unknown category '" + std::string(text) + "'");
  }
  return category_from_id(id);
}

std::vector<int> category_parts(ShapeCategory c) {
  switch (c) {
    case ShapeCategory::kLollipop:
      return {0, 1};
    case ShapeCategory::kTable:
      return {2, 3};
    case ShapeCategory::kCapsule:
      return {4, 5, 6};
    case ShapeCategory::kDumbbell:
      return {7, 8, 9};
  }
  return {};
}

std::vector<int> category_parts(int category_id) {
  return category_parts(category_from_id(category_id));
}

SyntheticShape generate_shape(const SyntheticSpec& spec) {
  const int id = static_cast<int>(spec.category);
  if (id < 0 || id >= static_cast<int>(kSyntheticCategoryCount)) {
    throw ContractError("generate: invalid category");
  }
  if (spec.n_points < kMinSyntheticPoints) {
    throw ContractError("generate: need at least " + std::to_string(kMinSyntheticPoints) +
                        " points");
  }
  if (!(spec.scale_min > 0.0) || spec.scale_max < spec.scale_min || spec.shape_variation < 0.0 ||
      spec.shape_variation >= 1.0) {
    throw ContractError("generate: invalid jitter ranges");
  }

  std::mt19937_64 rng(spec.seed);
  const auto parts = build_primitives(spec.category, spec.shape_variation, rng);
  const double scale = spec.scale_max > spec.scale_min
                           ? std::uniform_real_distribution<double>(spec.scale_min, spec.scale_max)(rng)
                           : spec.scale_min;
  const double angle =
      spec.rotate ? std::uniform_real_distribution<double>(0.0, 2.0 * kPi)(rng) : 0.0;
  const double ca = std::cos(angle);
  const double sa = std::sin(angle);

  SyntheticShape out;
  std::vector<double> areas;
  for (const Primitive& p : parts) {
    areas.push_back(p.area());
    out.part_area[static_cast<std::size_t>(p.label)] += p.area() * scale * scale;
  }
  std::discrete_distribution<std::size_t> pick(areas.begin(), areas.end());

  PointCloud& pc = out.cloud;
  pc.features = Matrix(spec.n_points, kPointFeatureWidth);
  pc.labels.resize(spec.n_points);
  pc.category = id;
  for (std::size_t i = 0; i < spec.n_points; ++i) {
    const Primitive& p = parts[pick(rng)];
    const auto [pos, nrm] = sample_surface(p, rng);
    auto row = pc.features.row(i);
    if (spec.rotate) {
      row[0] = scale * (ca * pos.x - sa * pos.y);
      row[1] = scale * (sa * pos.x + ca * pos.y);
      row[3] = ca * nrm.x - sa * nrm.y;
      row[4] = sa * nrm.x + ca * nrm.y;
    } else {
      row[0] = scale * pos.x;
      row[1] = scale * pos.y;
      row[3] = nrm.x;
      row[4] = nrm.y;
    }
    row[2] = scale * pos.z;
    row[5] = nrm.z;
    pc.labels[i] = p.label;
  }
  return out;
}

PointCloud generate(const SyntheticSpec& spec) { return generate_shape(spec).cloud; }

std::string format_cloud(const PointCloud& pc) {
  if (pc.features.cols() != kPointFeatureWidth) {
    throw ShapeError("write_cloud: expected 6 feature columns");
  }
  std::string out = "# x y z nx ny nz label\n";
  if (pc.category) out += "# category: " + std::to_string(*pc.category) + "\n";
  for (std::size_t i = 0; i < pc.size(); ++i) {
    auto row = pc.features.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) {
      append_double(out, pc.has_normals || c < 3 ? row[c] : 0.0);
      out += ' ';
    }
    out += std::to_string(pc.labeled() ? pc.labels[i] : -1);
    out += '\n';
  }
  return out;
}

PointCloud parse_cloud(std::string_view text) {
  PointCloud pc;
  std::vector<double> values;
  std::vector<int> labels;
  std::size_t labeled = 0;
  std::size_t zero_normals = 0;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (t[0] == '#') {
      constexpr std::string_view kTag = "# category:";
      if (t.rfind(kTag, 0) == 0) pc.category = parse_int(trim(t.substr(kTag.size())), line_no);
      continue;
    }
    const auto tokens = split_ws(t);
    if (tokens.size() != kPointFeatureWidth + 1) {
      throw ParseError("expected 7 fields, found " + std::to_string(tokens.size()), line_no);
    }
    double row[kPointFeatureWidth];
    for (std::size_t c = 0; c < kPointFeatureWidth; ++c) row[c] = parse_double(tokens[c], line_no);
    const int label = parse_int(tokens[kPointFeatureWidth], line_no);
    if (label < -1) throw ParseError("label must be >= -1", line_no);

    const double norm = std::sqrt(row[3] * row[3] + row[4] * row[4] + row[5] * row[5]);
    if (norm == 0.0) {
      ++zero_normals;
    } else if (std::abs(norm - 1.0) > 1e-3) {
      throw ParseError("normal is not unit length (norm " + std::to_string(norm) + ")", line_no);
    } else if (std::abs(norm - 1.0) > 1e-6) {
      for (int c = 3; c < 6; ++c) row[c] /= norm;
    }
    values.insert(values.end(), row, row + kPointFeatureWidth);
    labels.push_back(label);
    if (label >= 0) ++labeled;
    if (end == text.size()) break;
  }
  if (labels.empty()) throw EmptyInputError("cloud file has no points");
  if (zero_normals != 0 && zero_normals != labels.size()) {
    throw ParseError("some points have zero normals and others do not");
  }
  if (labeled != 0 && labeled != labels.size()) {
    throw ParseError("cloud mixes labeled and unlabeled points");
  }
  pc.features = Matrix(labels.size(), kPointFeatureWidth, std::move(values));
  pc.has_normals = zero_normals == 0;
  if (labeled != 0) pc.labels = std::move(labels);
  return pc;
}

void write_cloud(const PointCloud& pc, const std::filesystem::path& path) {
  write_file(path, format_cloud(pc));
}

PointCloud read_cloud(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_cloud(text);
  } catch (const ParseError& e) {
    if (dynamic_cast<const EmptyInputError*>(&e) != nullptr) {
      throw EmptyInputError(path.string() + ": " + e.what());
    }
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "unknown";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "test") return Split::kTest;
  throw ContractError("unknown split '" + std::string(text) + "'");
}

std::vector<ManifestEntry> DatasetManifest::split(Split s) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (e.split == s) out.push_back(e);
  }
  return out;
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const auto base = path.parent_path();
  DatasetManifest m;
  std::set<std::filesystem::path> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      constexpr std::string_view kTag = "# rgcnn-manifest v";
      if (t.rfind(kTag, 0) == 0) {
        m.version = parse_int(t.substr(kTag.size()), line_no);
        if (m.version != kManifestVersion) {
          throw ParseError("unsupported manifest version " + std::to_string(m.version), line_no);
        }
      }
      continue;
    }
    std::vector<std::string> fields;
    std::size_t s = 0;
    for (;;) {
      const std::size_t tab = t.find('\t', s);
      fields.push_back(trim(std::string_view(t).substr(s, tab == std::string::npos ? std::string::npos : tab - s)));
      if (tab == std::string::npos) break;
      s = tab + 1;
    }
    if (fields.size() != 3) {
      throw ParseError("expected path<TAB>category<TAB>split, found " +
                           std::to_string(fields.size()) + " fields",
                       line_no);
    }
    ManifestEntry e;
    std::filesystem::path p(fields[0]);
    e.path = p.is_absolute() ? p : base / p;
    try {
      e.category = static_cast<int>(parse_category(fields[1]));
      e.split = parse_split(fields[2]);
    } catch (const ContractError& err) {
      throw ParseError(err.what(), line_no);
    }
    const auto key = e.path.lexically_normal();
    if (!seen.insert(key).second) {
      throw ParseError("path listed twice: " + fields[0], line_no);
    }
    if (!std::filesystem::exists(e.path)) throw IoError("manifest entry missing: " + e.path.string());
    m.entries.push_back(std::move(e));
  }
  return m;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  const auto base = path.parent_path();
  std::string out = "# rgcnn-manifest v" + std::to_string(manifest.version) + "\n";
  for (const auto& e : manifest.entries) {
    std::filesystem::path p = e.path;
    if (!base.empty() && p.is_absolute() == base.is_absolute()) {
      const auto rel = p.lexically_relative(base);
      if (!rel.empty() && *rel.begin() != "..") p = rel;
    }
    out += p.generic_string();
    out += '\t';
    out += category_name(category_from_id(e.category));
    out += '\t';
    out += split_name(e.split);
    out += '\n';
  }
  write_file(path, out);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::filesystem::path generate_dataset(const DatasetSpec& spec, const std::filesystem::path& dir) {
  DatasetManifest manifest;
  const std::pair<Split, std::size_t> splits[] = {
      {Split::kTrain, spec.train}, {Split::kVal, spec.val}, {Split::kTest, spec.test}};
  std::uint64_t stream = 0;
  for (const auto& [split, count] : splits) {
    for (std::size_t i = 0; i < count; ++i) {
      SyntheticSpec s;
      s.category = static_cast<ShapeCategory>(i % kSyntheticCategoryCount);
      s.n_points = spec.n_points;
      s.seed = mix_seed(spec.seed, stream++);
      const PointCloud pc = generate(s);
      char name[64];
      std::snprintf(name, sizeof(name), "%s_%04zu.txt", category_name(s.category).data(), i);
      const auto path = dir / split_name(split) / name;
      write_cloud(pc, path);
      manifest.entries.push_back({path, static_cast<int>(s.category), split});
    }
  }
  const auto manifest_path = dir / "manifest.tsv";
  write_manifest(manifest, manifest_path);
  return manifest_path;
}

}  // namespace rgcnn
