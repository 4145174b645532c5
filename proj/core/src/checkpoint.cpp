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

#include "rgcnn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "rgcnn/errors.hpp"

namespace rgcnn {
namespace {

constexpr std::uint32_t kMaxPathLength = 1 << 16;

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  void put(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  void bytes(char* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw TruncatedFileError("checkpoint is truncated");
  }
  std::uint64_t get(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(width);
    return v;
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

// Guards against absurd sizes in corrupted headers before allocating.
constexpr std::uint32_t kMaxListLength = 1u << 16;

std::vector<std::size_t> read_dims(Reader& r) {
  const std::uint32_t n = r.u32();
  if (n == 0 || n > kMaxListLength) throw FormatError("checkpoint: bad head length");
  std::vector<std::size_t> dims(n);
  for (auto& d : dims) d = r.u32();
  return dims;
}

std::string first_difference(const RgcnnConfig& stored, const RgcnnConfig& expected) {
  if (stored.input_features != expected.input_features) return "conv1 input width";
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    if (stored.cheb_orders[l] != expected.cheb_orders[l] ||
        stored.feature_dims[l] != expected.feature_dims[l]) {
      return "conv" + std::to_string(l + 1) + " (order " + std::to_string(stored.cheb_orders[l]) +
             " width " + std::to_string(stored.feature_dims[l]) + ", expected order " +
             std::to_string(expected.cheb_orders[l]) + " width " +
             std::to_string(expected.feature_dims[l]) + ")";
    }
  }
  if (stored.category_conditioning != expected.category_conditioning) {
    return "seg_mlp1 (category conditioning width)";
  }
  for (std::size_t i = 0; i < std::max(stored.seg_mlp_dims.size(), expected.seg_mlp_dims.size());
       ++i) {
    if (i >= stored.seg_mlp_dims.size() || i >= expected.seg_mlp_dims.size() ||
        stored.seg_mlp_dims[i] != expected.seg_mlp_dims[i]) {
      return "seg_mlp" + std::to_string(i + 1);
    }
  }
  for (std::size_t i = 0; i < std::max(stored.cls_mlp_dims.size(), expected.cls_mlp_dims.size());
       ++i) {
    if (i >= stored.cls_mlp_dims.size() || i >= expected.cls_mlp_dims.size() ||
        stored.cls_mlp_dims[i] != expected.cls_mlp_dims[i]) {
      return "cls_mlp" + std::to_string(i + 1);
    }
  }
  return {};
}

}  // namespace

std::string serialize_checkpoint(const RgcnnModel& model, const TrainConfig& train) {
  Writer w;
  w.bytes(kCheckpointMagic, sizeof(kCheckpointMagic));
  w.u32(kCheckpointVersion);

  const RgcnnConfig& c = model.config();
  w.u32(static_cast<std::uint32_t>(c.input_features));
  for (auto k : c.cheb_orders) w.u32(static_cast<std::uint32_t>(k));
  for (auto f : c.feature_dims) w.u32(static_cast<std::uint32_t>(f));
  for (const auto* dims : {&c.seg_mlp_dims, &c.cls_mlp_dims}) {
    w.u32(static_cast<std::uint32_t>(dims->size()));
    for (auto d : *dims) w.u32(static_cast<std::uint32_t>(d));
  }
  w.u32(static_cast<std::uint32_t>(c.category_conditioning));
  w.f64(c.beta);
  w.f64(c.gamma);
  w.u64(c.seed);

  w.u32(static_cast<std::uint32_t>(train.task));
  w.u32(static_cast<std::uint32_t>(train.epochs));
  w.f64(train.learning_rate);
  w.f64(train.adam_beta1);
  w.f64(train.adam_beta2);
  w.f64(train.adam_epsilon);
  w.u32(static_cast<std::uint32_t>(train.batch_size));
  w.f64(train.gamma);
  w.f64(train.beta);
  w.u64(train.seed);
  w.u32(static_cast<std::uint32_t>(train.n_points));
  w.u32(train.normalize ? 1u : 0u);
  w.u32(static_cast<std::uint32_t>(train.log_interval));
  w.u32(static_cast<std::uint32_t>(train.checkpoint.size()));
  w.bytes(train.checkpoint.data(), train.checkpoint.size());

  const auto params = model.parameters();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const Matrix* p : params) {
    w.u32(2);
    w.u64(p->rows());
    w.u64(p->cols());
    for (double v : p->data()) w.f64(v);
  }
  return w.take();
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  char magic[4];
  if (bytes.size() < sizeof(magic)) throw FormatError("checkpoint: missing magic bytes");
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw FormatError("checkpoint: bad magic bytes");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw VersionError("checkpoint: unsupported format version " + std::to_string(version));
  }

  RgcnnConfig c;
  c.input_features = r.u32();
  for (auto& k : c.cheb_orders) k = r.u32();
  for (auto& f : c.feature_dims) f = r.u32();
  c.seg_mlp_dims = read_dims(r);
  c.cls_mlp_dims = read_dims(r);
  c.category_conditioning = r.u32();
  c.beta = r.f64();
  c.gamma = r.f64();
  c.seed = r.u64();

  TrainConfig t;
  const std::uint32_t task = r.u32();
  if (task > static_cast<std::uint32_t>(Task::kClassification)) {
    throw FormatError("checkpoint: unknown task id");
  }
  t.task = static_cast<Task>(task);
  t.epochs = r.u32();
  t.learning_rate = r.f64();
  t.adam_beta1 = r.f64();
  t.adam_beta2 = r.f64();
  t.adam_epsilon = r.f64();
  t.batch_size = r.u32();
  t.gamma = r.f64();
  t.beta = r.f64();
  t.seed = r.u64();
  t.n_points = r.u32();
  t.normalize = r.u32() != 0;
  t.log_interval = r.u32();
  const std::uint32_t path_length = r.u32();
  if (path_length > kMaxPathLength) throw FormatError("checkpoint: bad checkpoint path length");
  t.checkpoint.resize(path_length);
  r.bytes(t.checkpoint.data(), path_length);

  RgcnnModel model = [&] {
    try {
      return RgcnnModel(c);
    } catch (const ContractError& e) {
      throw FormatError(std::string("checkpoint: invalid architecture: ") + e.what());
    }
  }();
  auto params = model.parameters();
  const auto names = model.parameter_names();
  const std::uint32_t count = r.u32();
  if (count != params.size()) {
    throw ShapeError("checkpoint: " + std::to_string(count) + " parameter blobs, architecture has " +
                     std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::uint32_t rank = r.u32();
    if (rank != 2) throw ShapeError("checkpoint: " + names[i] + " has rank " + std::to_string(rank));
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    if (rows != params[i]->rows() || cols != params[i]->cols()) {
      throw ShapeError("checkpoint: " + names[i] + " is " + std::to_string(rows) + "x" +
                       std::to_string(cols) + ", architecture expects " +
                       std::to_string(params[i]->rows()) + "x" + std::to_string(params[i]->cols()));
    }
    for (double& v : params[i]->data()) v = r.f64();
  }
  if (!r.at_end()) throw FormatError("checkpoint: trailing bytes");
  return Checkpoint{std::move(model), t};
}

void save_checkpoint(const std::filesystem::path& path, const RgcnnModel& model,
                     const TrainConfig& train) {
  const std::string bytes = serialize_checkpoint(model, train);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const RgcnnConfig& expected) {
  Checkpoint ckpt = load_checkpoint(path);
  const std::string diff = first_difference(ckpt.model.config(), expected);
  if (!diff.empty()) throw ShapeError("checkpoint architecture mismatch at " + diff);
  return ckpt;
}

}  // namespace rgcnn
