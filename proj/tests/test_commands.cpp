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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "rgcnn/checkpoint.hpp"
#include "rgcnn/data.hpp"
#include "rgcnn/training.hpp"
#include "rgcnn_tools/commands.hpp"
#include "test_util.hpp"

namespace rgcnn {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_data_lines(const std::string& text) {
  std::size_t n = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) n += !line.empty() && line[0] != '#';
  return n;
}

// A small dataset and one quickly trained checkpoint per task, shared by
// every test in the suite.
class CommandTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("rgcnn_test_commands_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    ASSERT_EQ(run_cli({"gen-data", "--out", (dir_ / "data").string(), "--train", "8", "--val",
                       "4", "--test", "8", "--points", "128", "--seed", "5"})
                  .code,
              cli::kExitOk);
    manifest_ = (dir_ / "data" / "manifest.tsv").string();
    for (const char* task : {"seg", "cls"}) {
      const auto r = run_cli({"train", "--manifest", manifest_, "--checkpoint",
                              (dir_ / (std::string(task) + ".ckpt")).string(), "--task", task,
                              "--epochs", "2", "--n_points", "48", "--batch_size", "4"});
      ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    }
  }

  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static std::string path(const std::string& name) { return (dir_ / name).string(); }

  static inline fs::path dir_;
  static inline std::string manifest_;
};

TEST_F(CommandTest, TrainWritesCheckpointsAndLog) {
  EXPECT_TRUE(fs::exists(path("seg.ckpt")));
  EXPECT_TRUE(fs::exists(path("seg.best.ckpt")));
  const std::string log = slurp(path("seg.ckpt.log"));
  EXPECT_NE(log.find("epoch 1/2 loss="), std::string::npos) << log;
  EXPECT_NE(log.find("epoch 2/2"), std::string::npos);
  const Checkpoint ckpt = load_checkpoint(path("seg.ckpt"));
  EXPECT_EQ(ckpt.train.epochs, 2u);
  EXPECT_EQ(ckpt.train.n_points, 48u);
  EXPECT_EQ(ckpt.train.batch_size, 4u);
  EXPECT_EQ(ckpt.train.checkpoint, path("seg.ckpt"));
}

TEST_F(CommandTest, TrainingLogIsReproducible) {
  const auto r = run_cli({"train", "--manifest", manifest_, "--checkpoint", path("again.ckpt"),
                          "--epochs", "2", "--n_points", "48", "--batch_size", "4"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(slurp(path("again.ckpt.log")), slurp(path("seg.ckpt.log")));
  Checkpoint a = load_checkpoint(path("again.ckpt"));
  Checkpoint b = load_checkpoint(path("seg.ckpt"));
  a.train.checkpoint = b.train.checkpoint;
  EXPECT_EQ(serialize_checkpoint(a.model, a.train), serialize_checkpoint(b.model, b.train));
}

TEST_F(CommandTest, ConfigFileSuppliesDefaults) {
  {
    std::ofstream cfg(path("train.cfg"));
    cfg << "# short run\nepochs = 1\nn_points = 40\nlearning_rate=0.002\n";
  }
  auto r = run_cli({"train", "--config", path("train.cfg"), "--manifest", manifest_,
                    "--checkpoint", path("cfg.ckpt"), "--n_points", "36"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const Checkpoint ckpt = load_checkpoint(path("cfg.ckpt"));
  EXPECT_EQ(ckpt.train.epochs, 1u);
  EXPECT_EQ(ckpt.train.learning_rate, 0.002);
  EXPECT_EQ(ckpt.train.n_points, 36u);  // command line wins

  {
    std::ofstream bad(path("bad.cfg"));
    bad << "epochs 3\n";
  }
  r = run_cli({"train", "--config", path("bad.cfg"), "--manifest", manifest_, "--checkpoint",
               path("x.ckpt")});
  EXPECT_EQ(r.code, cli::kExitIo);
  EXPECT_NE(r.err.find("line 1"), std::string::npos) << r.err;
  {
    std::ofstream unknown(path("unknown.cfg"));
    unknown << "epochz = 3\n";
  }
  r = run_cli({"train", "--config", path("unknown.cfg"), "--manifest", manifest_,
               "--checkpoint", path("x.ckpt")});
  EXPECT_EQ(r.code, cli::kExitContract);
}

TEST_F(CommandTest, EvalPrintsTableAndCsv) {
  const auto r = run_cli({"eval", "--checkpoint", path("seg.ckpt"), "--manifest", manifest_,
                          "--split", "test", "--csv", path("eval.csv")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("overall"), std::string::npos);
  EXPECT_NE(r.out.find("lollipop"), std::string::npos);
  const std::string csv = slurp(path("eval.csv"));
  EXPECT_EQ(csv.rfind("category,shapes,accuracy,miou\n", 0), 0u) << csv;
  EXPECT_EQ(run_cli({"eval", "--checkpoint", path("seg.ckpt"), "--manifest", manifest_, "--split",
                     "test", "--csv", path("eval.csv")})
                .out,
            r.out);
}

TEST_F(CommandTest, UntrainedClassifierIsNearChance) {
  RgcnnConfig cfg = desk_config(kSyntheticPartCount, kSyntheticCategoryCount);
  cfg.seed = 77;
  TrainConfig train;
  train.task = Task::kClassification;
  train.n_points = 48;
  save_checkpoint(path("untrained.ckpt"), RgcnnModel(cfg), train);
  const Checkpoint ckpt = load_checkpoint(path("untrained.ckpt"));
  const DatasetManifest m = read_manifest(manifest_);
  std::vector<PointCloud> clouds;
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    for (auto& pc : load_split(m, s, 48, true, 1)) clouds.push_back(std::move(pc));
  }
  const EvalReport rep = evaluate(ckpt.model, Task::kClassification, clouds);
  EXPECT_NEAR(rep.accuracy, 0.25, 0.1);
}

TEST_F(CommandTest, EmptySplitIsContractError) {
  const fs::path only_train = dir_ / "only_train.tsv";
  {
    std::ofstream m(only_train);
    m << "data/train/lollipop_0000.txt\tlollipop\ttrain\n";
  }
  const auto r = run_cli({"eval", "--checkpoint", path("seg.ckpt"), "--manifest",
                          only_train.string(), "--split", "test"});
  EXPECT_EQ(r.code, cli::kExitContract);
  EXPECT_NE(r.err.find("empty"), std::string::npos);
}

TEST_F(CommandTest, SegmentLabelsEveryPointAndFollowsPermutation) {
  const DatasetManifest m = read_manifest(manifest_);
  const PointCloud raw = read_cloud(m.split(Split::kTest).front().path);
  write_cloud(raw, path("in.txt"));
  auto r = run_cli({"segment", "--checkpoint", path("seg.ckpt"), "--in", path("in.txt"), "--out",
                    path("out.txt")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(count_data_lines(slurp(path("out.txt"))), count_data_lines(slurp(path("in.txt"))));
  const PointCloud labeled = read_cloud(path("out.txt"));
  ASSERT_EQ(labeled.labels.size(), raw.size());
  const auto parts = category_parts(*raw.category);
  for (int l : labeled.labels) {
    EXPECT_NE(std::find(parts.begin(), parts.end(), l), parts.end());
  }

  std::mt19937_64 rng(3);
  const auto perm = testing::random_permutation(raw.size(), rng);
  write_cloud(select_points(raw, perm), path("in_perm.txt"));
  r = run_cli({"segment", "--checkpoint", path("seg.ckpt"), "--in", path("in_perm.txt"), "--out",
               path("out_perm.txt")});
  ASSERT_EQ(r.code, cli::kExitOk);
  const PointCloud permuted = read_cloud(path("out_perm.txt"));
  for (std::size_t i = 0; i < perm.size(); ++i) {
    EXPECT_EQ(permuted.labels[i], labeled.labels[perm[i]]) << i;
  }
}

TEST_F(CommandTest, SegmentAcceptsUnlabeledInputAndRejectsMalformed) {
  {
    std::ofstream f(path("unlabeled.txt"));
    for (int i = 0; i < 10; ++i) f << i * 0.1 << " " << (i % 3) * 0.2 << " 0.5 0 0 1 -1\n";
    std::ofstream bad(path("bad.txt"));
    bad << "0 0 0 0 0 1 0\n1 2 3\n";
  }
  EXPECT_EQ(run_cli({"segment", "--checkpoint", path("seg.ckpt"), "--in", path("unlabeled.txt"),
                     "--out", path("unlabeled_out.txt")})
                .code,
            cli::kExitOk);
  const PointCloud out = read_cloud(path("unlabeled_out.txt"));
  for (int l : out.labels) {
    EXPECT_GE(l, 0);
    EXPECT_LT(l, static_cast<int>(kSyntheticPartCount));
  }
  const auto r = run_cli({"segment", "--checkpoint", path("seg.ckpt"), "--in", path("bad.txt"),
                          "--out", path("bad_out.txt")});
  EXPECT_EQ(r.code, cli::kExitIo);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

std::vector<double> parse_scores(const std::string& out) {
  std::vector<double> scores;
  std::istringstream in(out.substr(out.find("scores") + 6));
  double v;
  while (in >> v) scores.push_back(v);
  return scores;
}

TEST_F(CommandTest, ClassifyIsPermutationInvariantAndStableUnderDuplicates) {
  const DatasetManifest m = read_manifest(manifest_);
  const PointCloud raw = read_cloud(m.split(Split::kTest)[1].path);
  write_cloud(raw, path("c.txt"));
  const auto base = run_cli({"classify", "--checkpoint", path("cls.ckpt"), "--in", path("c.txt")});
  ASSERT_EQ(base.code, cli::kExitOk) << base.err;
  const int category = std::stoi(base.out.substr(9));
  EXPECT_GE(category, 0);
  EXPECT_LT(category, 4);
  const auto scores = parse_scores(base.out);
  ASSERT_EQ(scores.size(), 4u);

  std::mt19937_64 rng(4);
  write_cloud(select_points(raw, testing::random_permutation(raw.size(), rng)), path("cp.txt"));
  const auto permuted = parse_scores(
      run_cli({"classify", "--checkpoint", path("cls.ckpt"), "--in", path("cp.txt")}).out);
  ASSERT_EQ(permuted.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(permuted[i], scores[i], 1e-9);

  std::vector<std::size_t> twice;
  for (std::size_t i = 0; i < raw.size(); ++i) twice.push_back(i);
  for (std::size_t i = 0; i < raw.size(); ++i) twice.push_back(i);
  write_cloud(select_points(raw, twice), path("cd.txt"));
  const auto dup = run_cli({"classify", "--checkpoint", path("cls.ckpt"), "--in", path("cd.txt")});
  EXPECT_EQ(std::stoi(dup.out.substr(9)), category);
}

TEST_F(CommandTest, RobustnessCsvIsDeterministicWithBaseline) {
  const std::vector<std::string> args = {"robustness", "--checkpoint", path("seg.ckpt"),
                                         "--manifest", manifest_, "--sweep", "density",
                                         "--values", "0.5,0.75", "--seeds", "1,2"};
  const auto a = run_cli(args);
  ASSERT_EQ(a.code, cli::kExitOk) << a.err;
  EXPECT_EQ(run_cli(args).out, a.out);
  EXPECT_EQ(a.out.rfind("sweep_name,value,seed,accuracy,miou\ndensity,0,1,", 0), 0u) << a.out;
  EXPECT_EQ(count_data_lines(a.out), 7u);  // header + 3 values x 2 seeds

  const auto eval = run_cli({"eval", "--checkpoint", path("seg.ckpt"), "--manifest", manifest_,
                             "--csv", path("e.csv")});
  const std::string eval_csv = slurp(path("e.csv"));
  const std::string overall = eval_csv.substr(eval_csv.find("overall,"));
  const std::string acc_miou = overall.substr(overall.find(',', 8) + 1);  // "acc,miou\n"
  EXPECT_NE(a.out.find("density,0,1," + acc_miou), std::string::npos) << a.out << eval_csv;

  auto r = run_cli({"robustness", "--checkpoint", path("seg.ckpt"), "--manifest", manifest_,
                    "--sweep", "noise", "--values", "0.6"});
  EXPECT_EQ(r.code, cli::kExitContract);
  r = run_cli({"robustness", "--checkpoint", path("seg.ckpt"), "--manifest", manifest_,
               "--sweep", "density", "--values", "0.96"});
  EXPECT_EQ(r.code, cli::kExitContract);
}

TEST_F(CommandTest, ExitCodes) {
  EXPECT_EQ(run_cli({}).code, cli::kExitContract);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitContract);
  EXPECT_EQ(run_cli({"train", "--manifest", manifest_}).code, cli::kExitContract);
  EXPECT_EQ(run_cli({"train", "--manifest", manifest_, "--checkpoint", path("e.ckpt"), "--epochs",
                     "0"})
                .code,
            cli::kExitContract);
  EXPECT_EQ(run_cli({"train", "--manifest", path("missing.tsv"), "--checkpoint", path("m.ckpt")})
                .code,
            cli::kExitIo);
  EXPECT_EQ(run_cli({"train", "--manifest", manifest_, "--checkpoint", "/proc/forbidden/m.ckpt"})
                .code,
            cli::kExitIo);
  EXPECT_EQ(run_cli({"eval", "--checkpoint", path("missing.ckpt"), "--manifest", manifest_}).code,
            cli::kExitIo);
  EXPECT_EQ(run_cli({"eval", "--checkpoint", path("seg.ckpt"), "--manifest", manifest_, "--split",
                     "holdout"})
                .code,
            cli::kExitContract);
  {
    std::ofstream junk(path("junk.ckpt"), std::ios::binary);
    junk << "not a checkpoint";
  }
  EXPECT_EQ(run_cli({"classify", "--checkpoint", path("junk.ckpt"), "--in", path("c.txt")}).code,
            cli::kExitIo);
  const auto help = run_cli({"train", "--help"});
  EXPECT_EQ(help.code, cli::kExitOk);
  EXPECT_NE(help.out.find("--learning_rate"), std::string::npos);
}

}  // namespace
}  // namespace rgcnn
