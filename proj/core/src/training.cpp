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

#include "rgcnn/training.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>

#include "rgcnn/adam.hpp"
#include "rgcnn/errors.hpp"
#include "rgcnn/tape.hpp"

namespace rgcnn {
namespace {

constexpr std::uint64_t kShuffleStream = 0x5EED0000;
constexpr std::uint64_t kLoadStream = 0x10AD0000;

std::vector<int> target_labels(Task task, const PointCloud& pc) {
  if (task == Task::kClassification) {
    if (!pc.category) throw ContractError("classification needs a cloud category");
    return {*pc.category};
  }
  if (!pc.labeled()) throw ContractError("segmentation training needs labeled clouds");
  return pc.labels;
}

ForwardRecord forward(Tape& tape, const RgcnnModel& model, Task task, const PointCloud& pc) {
  return task == Task::kSegmentation ? forward_segmentation(tape, model, pc)
                                     : forward_classification(tape, model, pc);
}

std::string format_double(double v) {
  // Shortest representation that round-trips exactly.
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

}  // namespace

std::string_view task_name(Task t) {
  return t == Task::kSegmentation ? "segmentation" : "classification";
}

Task parse_task(std::string_view text) {
  if (text == "segmentation" || text == "seg") return Task::kSegmentation;
  if (text == "classification" || text == "cls") return Task::kClassification;
  throw ContractError("unknown task '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ContractError("epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ContractError("learning rate must be positive");
  if (batch_size == 0) throw ContractError("batch size must be >= 1");
  if (n_points < 2) throw ContractError("n_points must be >= 2");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ContractError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ContractError("Adam epsilon must be positive");
  if (!(gamma >= 0.0)) throw ContractError("gamma must be non-negative");
  if (!(beta > 0.0)) throw ContractError("beta must be positive");
  if (log_interval == 0) throw ContractError("log interval must be >= 1");
}

PointCloud prepare_cloud(const PointCloud& raw, std::size_t n_points, bool normalize,
                         std::uint64_t seed) {
  PointCloud pc = random_sample(raw, n_points, seed);
  return normalize ? normalize_unit_cube(pc) : pc;
}

std::vector<PointCloud> load_split(const DatasetManifest& manifest, Split split,
                                   std::size_t n_points, bool normalize, std::uint64_t seed) {
  std::vector<PointCloud> out;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const ManifestEntry& e = manifest.entries[i];
    if (e.split != split) continue;
    PointCloud raw = read_cloud(e.path);
    raw.category = e.category;
    validate(raw, static_cast<int>(kSyntheticPartCount), 1);
    out.push_back(prepare_cloud(raw, n_points, normalize, mix_seed(seed, kLoadStream + i)));
  }
  return out;
}

std::string format_epoch_log(const EpochLog& log, std::size_t total_epochs) {
  std::string s = "epoch " + std::to_string(log.epoch) + "/" + std::to_string(total_epochs);
  s += " loss=" + format_double(log.total_loss);
  s += " ce=" + format_double(log.cross_entropy);
  s += " smooth=" + format_double(log.smoothness);
  s += " train_acc=" + format_double(log.train_accuracy);
  if (!std::isnan(log.val_metric)) s += " val=" + format_double(log.val_metric);
  return s;
}

RgcnnConfig model_config_for(const std::string& preset, const TrainConfig& train) {
  RgcnnConfig cfg;
  if (preset == "desk") {
    cfg = desk_config(kSyntheticPartCount, kSyntheticCategoryCount);
  } else if (preset == "full") {
    cfg = full_config();
  } else {
    throw ContractError("unknown preset '" + preset + "' (expected desk or full)");
  }
  cfg.beta = train.beta;
  cfg.gamma = train.gamma;
  cfg.seed = train.seed;
  return cfg;
}

TrainResult train(RgcnnModel model, const TrainConfig& config, std::span<const PointCloud> train_set,
                  std::span<const PointCloud> val_set,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  config.validate();
  if (train_set.empty()) throw ContractError("training split is empty");

  Adam adam({config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_epsilon});
  const std::vector<Matrix*> params = model.parameters();

  TrainResult result{model, model, {}, std::numeric_limits<double>::quiet_NaN()};
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::mt19937_64 rng(mix_seed(config.seed, kShuffleStream + epoch));
    std::shuffle(order.begin(), order.end(), rng);

    EpochLog log;
    log.epoch = epoch;
    std::size_t correct = 0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      std::vector<Matrix> grads;
      grads.reserve(params.size());
      for (const Matrix* p : params) grads.emplace_back(p->rows(), p->cols());

      for (std::size_t b = start; b < stop; ++b) {
        const PointCloud& pc = train_set[order[b]];
        const std::vector<int> labels = target_labels(config.task, pc);
        Tape tape;
        const ForwardRecord rec = forward(tape, model, config.task, pc);
        const LossTerms loss = total_loss(rec, labels, config.gamma);
        tape.backward(loss.total);
        for (std::size_t i = 0; i < params.size(); ++i) grads[i] += rec.parameters[i].grad();

        log.total_loss += loss.values.total;
        log.cross_entropy += loss.values.cross_entropy;
        log.smoothness += loss.values.smoothness_sum();
        const std::vector<int> pred = argmax_rows(rec.scores.value());
        for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == labels[i] ? 1 : 0;
        seen += pred.size();
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      for (Matrix& g : grads) g *= inv;
      adam.step(params, grads);
    }
    const double n = static_cast<double>(train_set.size());
    log.total_loss /= n;
    log.cross_entropy /= n;
    log.smoothness /= n;
    log.train_accuracy = static_cast<double>(correct) / static_cast<double>(seen);
    if (!std::isfinite(log.total_loss)) {
      throw NumericalError("training loss became non-finite at epoch " + std::to_string(epoch));
    }

    if (!val_set.empty()) {
      const EvalReport report = evaluate(model, config.task, val_set);
      log.val_metric = config.task == Task::kSegmentation ? report.miou : report.accuracy;
      if (std::isnan(result.best_val_metric) || log.val_metric > result.best_val_metric) {
        result.best_val_metric = log.val_metric;
        result.best_model = model;
      }
    }
    result.history.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  result.final_model = model;
  if (val_set.empty()) result.best_model = model;
  return result;
}

std::vector<int> predict_parts(const RgcnnModel& model, const PointCloud& pc) {
  const Matrix scores = segmentation_scores(model, pc);
  if (!pc.category) return argmax_rows(scores);
  std::vector<int> allowed;
  try {
    allowed = category_parts(*pc.category);
  } catch (const ContractError&) {
    return argmax_rows(scores);
  }
  for (int l : allowed) {
    if (static_cast<std::size_t>(l) >= scores.cols()) return argmax_rows(scores);
  }
  std::vector<int> out(scores.rows());
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    int best = allowed.front();
    for (int l : allowed) {
      if (scores(r, static_cast<std::size_t>(l)) > scores(r, static_cast<std::size_t>(best))) {
        best = l;
      }
    }
    out[r] = best;
  }
  return out;
}

EvalReport evaluate(const RgcnnModel& model, Task task, std::span<const PointCloud> clouds) {
  if (clouds.empty()) throw ContractError("evaluation split is empty");
  EvalReport report;
  report.task = task;
  report.shapes = clouds.size();

  struct Acc {
    std::size_t shapes = 0;
    double miou = 0.0;
    std::size_t correct = 0;
    std::size_t total = 0;
  };
  std::map<int, Acc> per_cat;

  if (task == Task::kSegmentation) {
    std::size_t correct = 0;
    std::size_t total = 0;
    double miou_sum = 0.0;
    for (const PointCloud& pc : clouds) {
      if (!pc.labeled()) throw ContractError("segmentation evaluation needs labeled clouds");
      const std::vector<int> pred = predict_parts(model, pc);
      std::vector<int> label_set;
      if (pc.category) {
        label_set = category_parts(*pc.category);
      } else {
        label_set = pc.labels;
        std::sort(label_set.begin(), label_set.end());
        label_set.erase(std::unique(label_set.begin(), label_set.end()), label_set.end());
      }
      const double shape_miou = miou(pred, pc.labels, label_set);
      std::size_t ok = 0;
      for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == pc.labels[i] ? 1 : 0;
      Acc& a = per_cat[pc.category.value_or(-1)];
      ++a.shapes;
      a.miou += shape_miou;
      a.correct += ok;
      a.total += pred.size();
      miou_sum += shape_miou;
      correct += ok;
      total += pred.size();
    }
    report.accuracy = static_cast<double>(correct) / static_cast<double>(total);
    report.miou = miou_sum / static_cast<double>(clouds.size());
  } else {
    std::vector<int> pred;
    std::vector<int> truth;
    for (const PointCloud& pc : clouds) {
      if (!pc.category) throw ContractError("classification evaluation needs categories");
      const int p = argmax_rows(classification_scores(model, pc)).front();
      pred.push_back(p);
      truth.push_back(*pc.category);
      Acc& a = per_cat[*pc.category];
      ++a.shapes;
      a.correct += p == *pc.category ? 1 : 0;
      ++a.total;
    }
    const AccuracyReport acc = accuracy(pred, truth);
    report.accuracy = acc.overall;
    report.mean_class_accuracy = acc.mean_class;
  }
  for (const auto& [cat, a] : per_cat) {
    CategoryMetrics m;
    m.category = cat;
    m.shapes = a.shapes;
    m.miou = task == Task::kSegmentation ? a.miou / static_cast<double>(a.shapes)
                                         : std::numeric_limits<double>::quiet_NaN();
    m.accuracy = static_cast<double>(a.correct) / static_cast<double>(a.total);
    report.per_category.push_back(m);
  }
  return report;
}

std::string_view sweep_name(Sweep s) { return s == Sweep::kNoise ? "noise" : "density"; }

Sweep parse_sweep(std::string_view text) {
  if (text == "noise") return Sweep::kNoise;
  if (text == "density") return Sweep::kDensity;
  throw ContractError("unknown sweep '" + std::string(text) + "' (expected noise or density)");
}

std::vector<double> default_sweep_values(Sweep s) {
  if (s == Sweep::kNoise) return {0.02, 0.05, 0.08, 0.1, 0.12, 0.15, 0.2};
  return {0.5, 0.75, 0.85, 0.95};
}

std::vector<ExperimentRow> robustness_sweep(const RgcnnModel& model, Task task,
                                            std::span<const PointCloud> clouds, Sweep sweep,
                                            std::vector<double> values,
                                            std::span<const std::uint64_t> seeds) {
  if (clouds.empty()) throw ContractError("robustness: no clouds to evaluate");
  if (seeds.empty()) throw ContractError("robustness: no seeds");
  const double max_value = sweep == Sweep::kNoise ? 0.5 : 0.95;
  for (double v : values) {
    if (!(v >= 0.0 && v <= max_value)) {
      throw ContractError("robustness: " + std::string(sweep_name(sweep)) + " value " +
                          format_double(v) + " outside [0, " + format_double(max_value) + "]");
    }
  }
  if (std::find(values.begin(), values.end(), 0.0) == values.end()) {
    values.insert(values.begin(), 0.0);
  }

  std::vector<ExperimentRow> rows;
  for (double v : values) {
    for (std::uint64_t seed : seeds) {
      std::vector<PointCloud> perturbed;
      perturbed.reserve(clouds.size());
      for (std::size_t i = 0; i < clouds.size(); ++i) {
        const std::uint64_t s = mix_seed(seed, i);
        perturbed.push_back(sweep == Sweep::kNoise ? jitter_gaussian(clouds[i], v, s)
                                                   : drop_points(clouds[i], v, s));
      }
      const EvalReport r = evaluate(model, task, perturbed);
      rows.push_back({sweep, v, seed, r.accuracy, r.miou});
    }
  }
  return rows;
}

std::string format_experiment_csv(std::span<const ExperimentRow> rows) {
  std::string out = "sweep_name,value,seed,accuracy,miou\n";
  for (const auto& r : rows) {
    out += std::string(sweep_name(r.sweep)) + "," + format_double(r.value) + "," +
           std::to_string(r.seed) + "," + format_double(r.accuracy) + "," +
           format_double(r.miou) + "\n";
  }
  return out;
}

}  // namespace rgcnn
