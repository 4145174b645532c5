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

#include "rgcnn_tools/commands.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string_view>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "CLI11.hpp"
#include "rgcnn/checkpoint.hpp"
#include "rgcnn/data.hpp"
#include "rgcnn/errors.hpp"
#include "rgcnn/training.hpp"

namespace rgcnn::cli {
namespace {

namespace fs = std::filesystem;

struct Context {
  std::ostream& out;
  std::ostream& err;
  int log_level;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Reads `key = value` lines (blank lines and `#` comments allowed) and turns
// them into `--key=value` arguments.
std::vector<std::string> config_file_args(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::vector<std::string> args;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string text = trim(line.substr(0, line.find('#')));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value in " + path.string(), number);
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) throw ParseError("empty key in " + path.string(), number);
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

// Splices the contents of any --config file in front of the explicit flags
// of the same subcommand, so that command-line values take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    fs::path config;
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      continue;
    }
    std::vector<std::string> expanded{args.front()};
    const auto from_file = config_file_args(config);
    expanded.insert(expanded.end(), from_file.begin(), from_file.end());
    expanded.insert(expanded.end(), args.begin() + 1, args.end());
    return expanded;
  }
  return args;
}

void ensure_writable(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream probe(path, std::ios::binary | std::ios::app);
  if (!probe) throw IoError("cannot write " + path.string());
}

fs::path best_checkpoint_path(const fs::path& checkpoint) {
  fs::path best = checkpoint;
  best.replace_filename(checkpoint.stem().string() + ".best" + checkpoint.extension().string());
  return best;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

// Shortest decimal form that parses back to the same double.
std::string exact(double v) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

std::vector<PointCloud> load_eval_split(const Checkpoint& ckpt, const fs::path& manifest_path,
                                        const std::string& split_text) {
  const Split split = parse_split(split_text);
  const DatasetManifest manifest = read_manifest(manifest_path);
  auto clouds = load_split(manifest, split, ckpt.train.n_points, ckpt.train.normalize,
                           ckpt.train.seed);
  if (clouds.empty()) throw ContractError("split '" + split_text + "' is empty");
  return clouds;
}

// Cloud as the model sees it: every point kept, normalized like training.
PointCloud model_input(const PointCloud& raw, const TrainConfig& train) {
  return train.normalize ? normalize_unit_cube(raw) : raw;
}

// ---- train ---------------------------------------------------------------

struct TrainArgs {
  TrainConfig config;
  std::string task = "seg";
  std::string preset = "desk";
  std::string manifest;
  std::string log;
  std::string config_file;
};

int cmd_train(const TrainArgs& a, const Context& ctx) {
  TrainConfig config = a.config;
  config.task = parse_task(a.task);
  config.validate();
  if (config.checkpoint.empty()) throw ContractError("--checkpoint is required");

  const fs::path checkpoint = config.checkpoint;
  const fs::path best = best_checkpoint_path(checkpoint);
  const fs::path log_path = a.log.empty() ? fs::path(checkpoint.string() + ".log") : fs::path(a.log);
  ensure_writable(checkpoint);
  ensure_writable(best);
  std::ofstream log(log_path, std::ios::trunc);
  if (!log) throw IoError("cannot write " + log_path.string());

  const DatasetManifest manifest = read_manifest(a.manifest);
  const auto train_set =
      load_split(manifest, Split::kTrain, config.n_points, config.normalize, config.seed);
  if (train_set.empty()) throw ContractError("training split is empty");
  const auto val_set =
      load_split(manifest, Split::kVal, config.n_points, config.normalize, config.seed);

  const RgcnnModel model(model_config_for(a.preset, config));
  if (ctx.log_level >= 1) {
    ctx.out << "training " << task_name(config.task) << " preset=" << a.preset
            << " parameters=" << model.parameter_count() << " train=" << train_set.size()
            << " val=" << val_set.size() << "\n";
  }
  const auto start = std::chrono::steady_clock::now();
  const TrainResult result = train(model, config, train_set, val_set, [&](const EpochLog& e) {
    const std::string line = format_epoch_log(e, config.epochs);
    log << line << "\n";
    const bool report = e.epoch % config.log_interval == 0 || e.epoch == config.epochs;
    if (ctx.log_level >= 1 && report) ctx.out << line << std::endl;
  });
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  save_checkpoint(checkpoint, result.final_model, config);
  save_checkpoint(best, result.best_model, config);
  if (ctx.log_level >= 1) {
    ctx.out << "wrote " << checkpoint.string() << " and " << best.string() << "\n";
  }
  if (ctx.log_level >= 2) ctx.out << "training took " << fmt(seconds) << " s\n";
  return kExitOk;
}

// ---- eval ----------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string manifest;
  std::string split = "test";
  std::string csv;
};

int cmd_eval(const EvalArgs& a, const Context& ctx) {
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const auto clouds = load_eval_split(ckpt, a.manifest, a.split);
  const EvalReport r = evaluate(ckpt.model, ckpt.train.task, clouds);
  const bool seg = r.task == Task::kSegmentation;

  ctx.out << "task " << task_name(r.task) << ", " << r.shapes << " shapes\n";
  ctx.out << std::left << std::setw(12) << "category" << std::right << std::setw(8) << "shapes"
          << std::setw(10) << "accuracy";
  if (seg) ctx.out << std::setw(10) << "mIoU";
  ctx.out << "\n";
  auto name_of = [](int c) {
    return c >= 0 && c < static_cast<int>(kSyntheticCategoryCount)
               ? std::string(category_name(category_from_id(c)))
               : std::to_string(c);
  };
  for (const CategoryMetrics& m : r.per_category) {
    ctx.out << std::left << std::setw(12) << name_of(m.category) << std::right << std::setw(8)
            << m.shapes << std::setw(10) << fmt(m.accuracy);
    if (seg) ctx.out << std::setw(10) << fmt(m.miou);
    ctx.out << "\n";
  }
  ctx.out << std::left << std::setw(12) << "overall" << std::right << std::setw(8) << r.shapes
          << std::setw(10) << fmt(r.accuracy);
  if (seg) ctx.out << std::setw(10) << fmt(r.miou);
  ctx.out << "\n";
  if (!seg) ctx.out << "mean class accuracy " << fmt(r.mean_class_accuracy) << "\n";

  if (!a.csv.empty()) {
    std::ofstream csv(a.csv, std::ios::trunc);
    if (!csv) throw IoError("cannot write " + a.csv);
    csv << "category,shapes,accuracy,miou\n";
    for (const CategoryMetrics& m : r.per_category) {
      csv << name_of(m.category) << "," << m.shapes << "," << exact(m.accuracy) << ","
          << exact(seg ? m.miou : r.miou) << "\n";
    }
    csv << "overall," << r.shapes << "," << exact(r.accuracy) << "," << exact(r.miou) << "\n";
  }
  return kExitOk;
}

// ---- segment / classify --------------------------------------------------

struct CloudArgs {
  std::string checkpoint;
  std::string in;
  std::string out;
};

int cmd_segment(const CloudArgs& a, const Context& ctx) {
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  PointCloud cloud = read_cloud(a.in);
  cloud.labels = predict_parts(ckpt.model, model_input(cloud, ckpt.train));
  write_cloud(cloud, a.out);
  if (ctx.log_level >= 1) {
    ctx.out << "labeled " << cloud.size() << " points -> " << a.out << "\n";
  }
  return kExitOk;
}

int cmd_classify(const CloudArgs& a, const Context& ctx) {
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const PointCloud cloud = read_cloud(a.in);
  const Matrix scores = classification_scores(ckpt.model, model_input(cloud, ckpt.train));
  const int top = argmax_rows(scores).front();
  ctx.out << "category " << top;
  if (top < static_cast<int>(kSyntheticCategoryCount)) {
    ctx.out << " " << category_name(category_from_id(top));
  }
  ctx.out << "\nscores";
  ctx.out << std::setprecision(17);
  for (std::size_t c = 0; c < scores.cols(); ++c) ctx.out << " " << scores(0, c);
  ctx.out << "\n";
  return kExitOk;
}

// ---- robustness ----------------------------------------------------------

struct RobustnessArgs {
  std::string checkpoint;
  std::string manifest;
  std::string split = "test";
  std::string sweep = "noise";
  std::vector<double> values;
  std::vector<std::uint64_t> seeds{1};
  std::string csv;
};

int cmd_robustness(const RobustnessArgs& a, const Context& ctx) {
  const Sweep sweep = parse_sweep(a.sweep);
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const auto clouds = load_eval_split(ckpt, a.manifest, a.split);
  const auto values = a.values.empty() ? default_sweep_values(sweep) : a.values;
  const auto rows = robustness_sweep(ckpt.model, ckpt.train.task, clouds, sweep, values, a.seeds);
  const std::string csv = format_experiment_csv(rows);
  if (a.csv.empty()) {
    ctx.out << csv;
  } else {
    std::ofstream file(a.csv, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot write " + a.csv);
    file << csv;
    if (ctx.log_level >= 1) ctx.out << "wrote " << rows.size() << " rows to " << a.csv << "\n";
  }
  return kExitOk;
}

// ---- gen-data ------------------------------------------------------------

struct GenArgs {
  DatasetSpec spec{200, 40, 40, 1024, 1};
  std::string out;
};

int cmd_gen_data(const GenArgs& a, const Context& ctx) {
  const fs::path manifest = generate_dataset(a.spec, a.out);
  if (ctx.log_level >= 1) {
    ctx.out << "generated " << a.spec.train + a.spec.val + a.spec.test << " clouds, manifest "
            << manifest.string() << "\n";
  }
  return kExitOk;
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return kExitContract;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace

void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
#endif
}

int log_level_from_env() {
  const char* value = std::getenv("RGCNN_LOG");
  if (value == nullptr) return 1;
  const std::string_view v(value);
  if (v == "quiet" || v == "0") return 0;
  if (v == "debug" || v == "2") return 2;
  return 1;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  const Context ctx{out, err, log_level_from_env()};

  CLI::App app{"Regularized graph CNN for point cloud segmentation and classification", "rgcnn"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  TrainArgs train_args;
  TrainConfig& tc = train_args.config;
  auto* train_cmd = app.add_subcommand("train", "Train a model from a dataset manifest");
  train_cmd->add_option("--manifest", train_args.manifest, "Dataset manifest (TSV)")->required();
  train_cmd->add_option("--checkpoint", tc.checkpoint, "Output checkpoint path")->required();
  train_cmd->add_option("--config", train_args.config_file, "key = value file of defaults");
  train_cmd->add_option("--preset", train_args.preset, "desk or full")->capture_default_str();
  train_cmd->add_option("--task", train_args.task, "seg or cls")->capture_default_str();
  train_cmd->add_option("--log", train_args.log, "Training log path (default <checkpoint>.log)");
  train_cmd->add_option("--epochs", tc.epochs)->capture_default_str();
  train_cmd->add_option("--learning_rate,--learning-rate", tc.learning_rate)->capture_default_str();
  train_cmd->add_option("--adam_beta1,--adam-beta1", tc.adam_beta1)->capture_default_str();
  train_cmd->add_option("--adam_beta2,--adam-beta2", tc.adam_beta2)->capture_default_str();
  train_cmd->add_option("--adam_epsilon,--adam-epsilon", tc.adam_epsilon)->capture_default_str();
  train_cmd->add_option("--batch_size,--batch-size", tc.batch_size, "Gradient accumulation count")
      ->capture_default_str();
  train_cmd->add_option("--gamma", tc.gamma, "Smoothness weight")->capture_default_str();
  train_cmd->add_option("--beta", tc.beta, "Graph kernel width")->capture_default_str();
  train_cmd->add_option("--seed", tc.seed)->capture_default_str();
  train_cmd->add_option("--n_points,--n-points", tc.n_points, "Points sampled per cloud")
      ->capture_default_str();
  train_cmd->add_option("--normalize", tc.normalize, "Unit-cube normalization")
      ->capture_default_str();
  train_cmd->add_option("--log_interval,--log-interval", tc.log_interval)->capture_default_str();

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint)->required();
  eval_cmd->add_option("--manifest", eval_args.manifest)->required();
  eval_cmd->add_option("--split", eval_args.split, "train, val or test")->capture_default_str();
  eval_cmd->add_option("--csv", eval_args.csv, "Write per-category metrics as CSV");

  CloudArgs segment_args;
  auto* segment_cmd = app.add_subcommand("segment", "Label every point of a cloud file");
  segment_cmd->add_option("--checkpoint", segment_args.checkpoint)->required();
  segment_cmd->add_option("--in", segment_args.in)->required();
  segment_cmd->add_option("--out", segment_args.out)->required();

  CloudArgs classify_args;
  auto* classify_cmd = app.add_subcommand("classify", "Predict the category of a cloud file");
  classify_cmd->add_option("--checkpoint", classify_args.checkpoint)->required();
  classify_cmd->add_option("--in", classify_args.in)->required();

  RobustnessArgs rob_args;
  auto* rob_cmd = app.add_subcommand("robustness", "Accuracy under noise or point dropping");
  rob_cmd->add_option("--checkpoint", rob_args.checkpoint)->required();
  rob_cmd->add_option("--manifest", rob_args.manifest)->required();
  rob_cmd->add_option("--split", rob_args.split)->capture_default_str();
  rob_cmd->add_option("--sweep", rob_args.sweep, "noise or density")->capture_default_str();
  rob_cmd->add_option("--values", rob_args.values, "Comma-separated sweep values")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  rob_cmd->add_option("--seeds", rob_args.seeds, "Comma-separated perturbation seeds")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  rob_cmd->add_option("--csv", rob_args.csv, "Output CSV (default stdout)");

  GenArgs gen_args;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic dataset and manifest");
  gen_cmd->add_option("--out", gen_args.out, "Output directory")->required();
  gen_cmd->add_option("--train", gen_args.spec.train)->capture_default_str();
  gen_cmd->add_option("--val", gen_args.spec.val)->capture_default_str();
  gen_cmd->add_option("--test", gen_args.spec.test)->capture_default_str();
  gen_cmd->add_option("--points", gen_args.spec.n_points, "Points per generated cloud")
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen_args.spec.seed)->capture_default_str();

  return guarded(err, [&]() -> int {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    try {
      app.parse(args);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << "\n";
      return kExitContract;
    }
    if (*train_cmd) return cmd_train(train_args, ctx);
    if (*eval_cmd) return cmd_eval(eval_args, ctx);
    if (*segment_cmd) return cmd_segment(segment_args, ctx);
    if (*classify_cmd) return cmd_classify(classify_args, ctx);
    if (*rob_cmd) return cmd_robustness(rob_args, ctx);
    if (*gen_cmd) return cmd_gen_data(gen_args, ctx);
    return kExitContract;
  });
}

}  // namespace rgcnn::cli
