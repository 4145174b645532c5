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

#include <benchmark/benchmark.h>

#include <random>

#include "rgcnn/chebconv.hpp"
#include "rgcnn/data.hpp"
#include "rgcnn/graph.hpp"
#include "rgcnn/loss.hpp"
#include "rgcnn/model.hpp"
#include "rgcnn/training.hpp"

namespace {

using namespace rgcnn;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = u(rng);
  return m;
}

PointCloud synthetic_cloud(std::size_t n) {
  SyntheticSpec spec;
  spec.n_points = std::max(n, kMinSyntheticPoints);
  return prepare_cloud(generate(spec), n, true, 1);
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 1);
  const Matrix b = random_matrix(n, 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(2 * n * n * 64));
}
BENCHMARK(BM_Matmul)->Arg(256)->Arg(1024);

void BM_NormalizedLaplacian(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix features = random_matrix(n, static_cast<std::size_t>(state.range(1)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(normalized_laplacian(features, 1.0));
}
BENCHMARK(BM_NormalizedLaplacian)->Args({256, 6})->Args({256, 128})->Args({1024, 64});

void BM_ChebForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  const ChebLayer layer = ChebLayer::initialized(5, 32, 64, rng);
  const Matrix x = random_matrix(n, 32, 5);
  const Matrix lap = normalized_laplacian(x, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(cheb_forward(layer, lap, x));
}
BENCHMARK(BM_ChebForward)->Arg(256)->Arg(1024);

void BM_SegmentationForward(benchmark::State& state) {
  const PointCloud pc = synthetic_cloud(static_cast<std::size_t>(state.range(0)));
  const RgcnnModel model(desk_config(kSyntheticPartCount, kSyntheticCategoryCount));
  for (auto _ : state) benchmark::DoNotOptimize(segmentation_scores(model, pc));
}
BENCHMARK(BM_SegmentationForward)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_TrainingStep(benchmark::State& state) {
  const PointCloud pc = synthetic_cloud(static_cast<std::size_t>(state.range(0)));
  const RgcnnModel model(desk_config(kSyntheticPartCount, kSyntheticCategoryCount));
  for (auto _ : state) {
    Tape tape;
    const ForwardRecord rec = forward_segmentation(tape, model, pc);
    tape.backward(total_loss(rec, pc.labels, 1e-9).total);
    benchmark::DoNotOptimize(rec.parameters.front().grad());
  }
}
BENCHMARK(BM_TrainingStep)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
