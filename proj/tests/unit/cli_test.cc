// Copyright 2026 The vhd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "vhd/cli/commands.h"
#include "vhd/cli/run_config.h"
#include "vhd/error.h"

namespace vhd::cli {
namespace {

namespace fs = std::filesystem;

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& name)
      : path_(fs::temp_directory_path() /
              ("vhd_cli_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string operator/(const std::string& s) const { return (path_ / s).string(); }

 private:
  fs::path path_;
};

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "vhd");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const std::vector<std::string> kSmallCorpus = {
    "--set", "synth.videos_per_category=6", "--set",
    "synth.segments_per_video=10", "--set", "synth.dim=16"};

std::vector<std::string> small_training(const std::string& manifest) {
  return {"--set", "data.manifest=" + manifest, "--set", "model.model_dim=16",
          "--set", "model.num_heads=2", "--set", "model.num_layers=1",
          "--set", "train.epochs=2", "--set", "train.steps_per_epoch=3",
          "--set", "train.set_size=4"};
}

std::vector<std::string> concat(std::vector<std::string> a,
                                const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

TEST(RunConfigTest, DefaultsCoverEveryKey) {
  RunConfig c;
  for (const auto& k : config_keys()) {
    EXPECT_EQ(c.get(k.name), k.default_value) << k.name;
  }
  EXPECT_EQ(c.get_size("train.set_size"), 20u);
  EXPECT_DOUBLE_EQ(c.get_double("train.base_lr"), 1e-3);
  EXPECT_TRUE(c.get_bool("train.detach_teacher"));
}

TEST(RunConfigTest, MergeTextParsesCommentsAndWhitespace) {
  RunConfig c;
  c.merge_text("# comment\n\n  train.lambda =  0.25 \nseed=7\n", "inline");
  EXPECT_DOUBLE_EQ(c.get_double("train.lambda"), 0.25);
  EXPECT_EQ(c.get_u64("seed"), 7u);
  EXPECT_DOUBLE_EQ(c.train_config().lambda, 0.25);
}

TEST(RunConfigTest, UnknownKeyNamesOriginAndLine) {
  RunConfig c;
  try {
    c.merge_text("seed = 1\ntrain.lamda = 2\n", "run.cfg");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("run.cfg:2"), std::string::npos)
        << e.what();
  }
}

TEST(RunConfigTest, MalformedValuesAreRejected) {
  RunConfig c;
  c.set("train.set_size", "twenty");
  EXPECT_THROW(c.get_size("train.set_size"), ConfigError);
  c.set("train.detach_teacher", "maybe");
  EXPECT_THROW(c.get_bool("train.detach_teacher"), ConfigError);
  EXPECT_THROW(c.merge_text("no equals sign\n", "x"), ConfigError);
}

TEST(RunConfigTest, ResolvedTextRoundTrips) {
  RunConfig a;
  a.set("train.lambda", "0.5");
  a.set("synth.categories", "a,b,c");
  RunConfig b;
  b.merge_text(a.resolved_text(), "echo");
  EXPECT_EQ(a.resolved_text(), b.resolved_text());
  EXPECT_EQ(b.get_list("synth.categories"),
            (std::vector<std::string>{"a", "b", "c"}));
}

TEST(CliTest, MissingOrUnknownSubcommandExitsTwo) {
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(invoke({"train-sl", "--bogus-flag"}).code, kExitUsage);
}

TEST(CliTest, HelpExitsZero) {
  const Outcome o = invoke({"--help"});
  EXPECT_EQ(o.code, kExitOk);
  EXPECT_NE(o.out.find("gen-synth"), std::string::npos);
}

TEST(CliTest, UnknownConfigKeyExitsTwo) {
  ScratchDir dir("badkey");
  const Outcome o = invoke({"gen-synth", "--out", dir / "c", "--set",
                            "synth.nope=1"});
  EXPECT_EQ(o.code, kExitUsage);
  EXPECT_NE(o.err.find("synth.nope"), std::string::npos);
}

TEST(CliTest, TooSmallSyntheticDimExitsTwo) {
  ScratchDir dir("dim4");
  const Outcome o =
      invoke({"gen-synth", "--out", dir / "c", "--set", "synth.dim=4"});
  EXPECT_EQ(o.code, kExitUsage);
  EXPECT_FALSE(o.err.empty());
}

TEST(CliTest, GenSynthRefusesNonEmptyDirectoryWithoutForce) {
  ScratchDir dir("force");
  const std::string out = dir / "c";
  ASSERT_EQ(invoke(concat({"gen-synth", "--out", out}, kSmallCorpus)).code,
            kExitOk);
  EXPECT_EQ(invoke(concat({"gen-synth", "--out", out}, kSmallCorpus)).code,
            kExitUsage);
  EXPECT_EQ(
      invoke(concat({"gen-synth", "--force", "--out", out}, kSmallCorpus)).code,
      kExitOk);
  EXPECT_TRUE(fs::exists(fs::path(out) / "manifest.tsv"));
  EXPECT_TRUE(fs::exists(fs::path(out) / "resolved.cfg"));
}

TEST(CliTest, GenSynthIsDeterministicPerSeed) {
  ScratchDir dir("gendet");
  for (const char* name : {"a", "b"}) {
    ASSERT_EQ(invoke(concat({"gen-synth", "--seed", "5", "--out", dir / name},
                            kSmallCorpus))
                  .code,
              kExitOk);
  }
  for (const auto& entry : fs::directory_iterator(dir.path() / "a" / "features")) {
    const fs::path twin = dir.path() / "b" / "features" / entry.path().filename();
    EXPECT_EQ(slurp(entry.path()), slurp(twin)) << entry.path();
  }
}

TEST(CliTest, TrainScoreEvalPipeline) {
  ScratchDir dir("pipeline");
  ASSERT_EQ(invoke(concat({"gen-synth", "--out", dir / "c"}, kSmallCorpus)).code,
            kExitOk);
  const auto train = small_training(dir / "c/manifest.tsv");
  for (const char* run_dir : {"dl1", "dl2"}) {
    const Outcome o = invoke(concat({"train-dl", "--out", dir / run_dir}, train));
    ASSERT_EQ(o.code, kExitOk) << o.err;
  }
  EXPECT_EQ(slurp(dir.path() / "dl1/model.ckpt"),
            slurp(dir.path() / "dl2/model.ckpt"));
  EXPECT_EQ(slurp(dir.path() / "dl1/loss_log.csv"),
            slurp(dir.path() / "dl2/loss_log.csv"));
  EXPECT_TRUE(fs::exists(dir.path() / "dl1/resolved.cfg"));

  const Outcome ev =
      invoke(concat({"eval", "--out", dir / "ev", "--checkpoint",
                     dir / "dl1/model.ckpt", "--set", "eval.category=target"},
                    train));
  ASSERT_EQ(ev.code, kExitOk) << ev.err;
  EXPECT_NE(ev.out.find("map,target,"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir.path() / "ev/scores.csv"));
  EXPECT_TRUE(fs::exists(dir.path() / "ev/metrics.csv"));

  // Coarse and fine heads both exist; an SL head does not.
  EXPECT_EQ(invoke(concat({"score", "--out", dir / "s", "--checkpoint",
                           dir / "dl1/model.ckpt", "--mode", "coarse"},
                          train))
                .code,
            kExitOk);
  EXPECT_EQ(invoke(concat({"score", "--out", dir / "s2", "--checkpoint",
                           dir / "dl1/model.ckpt", "--mode", "sl"},
                          train))
                .code,
            kExitUsage);
}

TEST(CliTest, SweepWritesValueMapTable) {
  ScratchDir dir("sweep");
  ASSERT_EQ(invoke(concat({"gen-synth", "--out", dir / "c"}, kSmallCorpus)).code,
            kExitOk);
  const Outcome o = invoke(concat({"sweep", "--out", dir / "sw", "--axis", "N",
                                   "--values", "4,6"},
                                  small_training(dir / "c/manifest.tsv")));
  ASSERT_EQ(o.code, kExitOk) << o.err;
  std::istringstream table(slurp(dir.path() / "sw/sweep.csv"));
  std::string line;
  std::getline(table, line);
  EXPECT_EQ(line, "value,map");
  int rows = 0;
  while (std::getline(table, line)) ++rows;
  EXPECT_EQ(rows, 2);
  EXPECT_EQ(invoke(concat({"sweep", "--out", dir / "sw2", "--axis", "depth",
                           "--values", "1"},
                          small_training(dir / "c/manifest.tsv")))
                .code,
            kExitUsage);
}

TEST(CliTest, OddSetSizeForDualLearnerExitsTwo) {
  ScratchDir dir("odd");
  ASSERT_EQ(invoke(concat({"gen-synth", "--out", dir / "c"}, kSmallCorpus)).code,
            kExitOk);
  auto args = concat({"train-dl", "--out", dir / "x"},
                     small_training(dir / "c/manifest.tsv"));
  args.insert(args.end(), {"--set", "train.set_size=5"});
  EXPECT_EQ(invoke(args).code, kExitUsage);
}

TEST(CliTest, DivergentTrainingExitsThree) {
  ScratchDir dir("diverge");
  ASSERT_EQ(invoke(concat({"gen-synth", "--out", dir / "c"}, kSmallCorpus)).code,
            kExitOk);
  auto args = concat({"train-sl", "--out", dir / "x"},
                     small_training(dir / "c/manifest.tsv"));
  args.insert(args.end(), {"--set", "data.category=source", "--set",
                           "train.base_lr=1e300", "--set",
                           "train.fp32_params=false"});
  const Outcome o = invoke(args);
  EXPECT_EQ(o.code, kExitNumerical) << o.err;
}

TEST(CliTest, MissingManifestExitsTwo) {
  ScratchDir dir("nomanifest");
  EXPECT_EQ(invoke({"train-sl", "--out", dir / "x"}).code, kExitUsage);
  EXPECT_EQ(invoke({"train-sl", "--out", dir / "x", "--set",
                    "data.manifest=" + (dir / "missing.tsv")})
                .code,
            kExitUsage);
}

}  // namespace
}  // namespace vhd::cli
