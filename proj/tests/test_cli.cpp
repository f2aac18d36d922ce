// Copyright 2026 The BossNet Authors
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

// End-to-end runs of the command-line tool.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "test_util.hpp"

namespace bossnet {
namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string cmd = std::string(BOSSNET_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

// One trained run shared by the suite.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = testing::temp_dir("cli");
    ASSERT_EQ(run("gen-babi --task 1 --dialogs 6 --seed 3 --out " + (dir_ / "train.txt").string()), 0);
    ASSERT_EQ(run("gen-babi --task 1 --dialogs 3 --seed 4 --out " + (dir_ / "dev.txt").string()), 0);
    spit(dir_ / "run.toml", "train_path = \"" + (dir_ / "train.txt").string() +
                                "\"\ndev_path = \"" + (dir_ / "dev.txt").string() +
                                "\"\nrun_dir = \"" + (dir_ / "run").string() +
                                "\"\nembed_dim = 8\nbatch_size = 8\n");
    ASSERT_EQ(run("train --quiet --config " + (dir_ / "run.toml").string() + " --epochs 1"), 0);
  }

  static fs::path dir_;
};

fs::path CliTest::dir_;

TEST_F(CliTest, TrainWritesRunDirectory) {
  for (const char* f : {"config.snapshot", "log.jsonl", "checkpoint.best", "report.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "run" / f)) << f;
  }
  const auto log = slurp(dir_ / "run" / "log.jsonl");
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 1);
  EXPECT_EQ(nlohmann::json::parse(log)["epoch"], 1);
  const auto report = nlohmann::json::parse(slurp(dir_ / "run" / "report.json"));
  EXPECT_TRUE(report.contains("per_response_acc"));
  const RunConfig snap = parse_run_config(slurp(dir_ / "run" / "config.snapshot"));
  EXPECT_EQ(snap.train.epochs, 1);
  EXPECT_EQ(snap.train.embed_dim, 8);

  // Non-empty run dir without --force; then with it and zero epochs.
  EXPECT_EQ(run("train --quiet --config " + (dir_ / "run.toml").string()), 2);
  EXPECT_EQ(run("train --quiet --force --config " + (dir_ / "run.toml").string() +
                " --epochs 0 --set dld_rate=0.1"),
            0);
  EXPECT_EQ(parse_run_config(slurp(dir_ / "run" / "config.snapshot")).train.dld_rate, 0.1);
}

TEST_F(CliTest, BadConfigExitsTwo) {
  spit(dir_ / "bad.toml", "learning_rat = 0.1\n");
  EXPECT_EQ(run("train --config " + (dir_ / "bad.toml").string()), 2);
  EXPECT_EQ(run("train --config " + (dir_ / "missing.toml").string()), 2);
  EXPECT_EQ(run("no-such-command"), 2);
  EXPECT_EQ(run("train --quiet --config " + (dir_ / "run.toml").string() + " --set gamma=3"), 2);
}

TEST_F(CliTest, EvaluateIsDeterministic) {
  const std::string base = "evaluate --checkpoint " + (dir_ / "run" / "checkpoint.best").string() +
                           " --corpus " + (dir_ / "dev.txt").string();
  const std::string cmd1 = std::string(BOSSNET_CLI) + " " + base + " > " + (dir_ / "e1.json").string();
  const std::string cmd2 = std::string(BOSSNET_CLI) + " " + base + " --dump-responses " +
                           (dir_ / "dump.tsv").string() + " > " + (dir_ / "e2.json").string();
  ASSERT_EQ(std::system(cmd1.c_str()), 0);
  ASSERT_EQ(std::system(cmd2.c_str()), 0);
  EXPECT_EQ(slurp(dir_ / "e1.json"), slurp(dir_ / "e2.json"));
  const auto j = nlohmann::json::parse(slurp(dir_ / "e1.json"));
  const auto dump = slurp(dir_ / "dump.tsv");
  EXPECT_EQ(std::size_t(std::count(dump.begin(), dump.end(), '\n')),
            j["counts"]["responses"].get<std::size_t>());

  // A corpus sharing no words with the vocabulary.
  spit(dir_ / "alien.txt", "1 qqq\tzzz\n");
  EXPECT_EQ(run("evaluate --checkpoint " + (dir_ / "run" / "checkpoint.best").string() +
                " --corpus " + (dir_ / "alien.txt").string()),
            2);
  spit(dir_ / "junk.ckpt", "junk");
  EXPECT_EQ(run("evaluate --checkpoint " + (dir_ / "junk.ckpt").string() + " --corpus " +
                (dir_ / "dev.txt").string()),
            2);
}

TEST_F(CliTest, KaGenWritesSweep) {
  const fs::path out = dir_ / "ka";
  ASSERT_EQ(run("ka-gen --corpus " + (dir_ / "dev.txt").string() + " --seed 5 --outdir " +
                out.string()),
            0);
  for (int pct = 0; pct <= 100; pct += 10) {
    EXPECT_TRUE(fs::exists(out / ("ka_" + std::to_string(pct) + ".txt"))) << pct;
    EXPECT_TRUE(fs::exists(out / ("ka_" + std::to_string(pct) + ".manifest.json"))) << pct;
  }
  EXPECT_EQ(slurp(out / "ka_0.txt"), slurp(dir_ / "dev.txt"));

  const Corpus src = parse_babi((dir_ / "dev.txt").string());
  const Corpus half = parse_babi((out / "ka_50.txt").string());
  const KaManifest m =
      KaManifest::from_json(nlohmann::json::parse(slurp(out / "ka_50.manifest.json")));
  EXPECT_EQ(m.mapping.size(), ka_selection_count(0.5, collect_entities(src).size()));
  EXPECT_EQ(write_babi(rename_tokens(half, invert(m.mapping))), write_babi(src));

  EXPECT_EQ(run("ka-gen --corpus " + (dir_ / "dev.txt").string() + " --fractions 0.25 --outdir " +
                out.string()),
            2);
  EXPECT_EQ(run("ka-gen --corpus " + (dir_ / "dev.txt").string() +
                " --fractions 0.25 --any-fraction --outdir " + out.string()),
            0);
}

TEST_F(CliTest, DumpAttention) {
  const fs::path out = dir_ / "attn";
  const std::string base = "dump-attention --checkpoint " +
                           (dir_ / "run" / "checkpoint.best").string() + " --corpus " +
                           (dir_ / "dev.txt").string();
  ASSERT_EQ(run(base + " --dialog 1 --turn 3 --out " + out.string()), 0);
  const auto j = nlohmann::json::parse(slurp(out / "attention.json"));
  ASSERT_FALSE(j["steps"].empty());
  for (const auto& step : j["steps"]) {
    double alpha = 0, beta = 0;
    for (double a : step["alpha"]) alpha += a;
    for (const auto& row : step["beta"]) {
      for (double b : row) beta += b;
    }
    EXPECT_NEAR(alpha, 1.0, 1e-5);
    EXPECT_NEAR(beta, 1.0, 1e-5);
    const double g = step["gate"];
    EXPECT_GE(g, 0.0);
    EXPECT_LE(g, 1.0);
  }
  EXPECT_TRUE(fs::exists(out / "step_1.ppm"));
  EXPECT_EQ(slurp(out / "step_1.ppm").substr(0, 2), "P6");
  EXPECT_EQ(run(base + " --dialog 99 --turn 1 --out " + out.string()), 2);
  EXPECT_EQ(run(base + " --dialog 1 --turn 99 --out " + out.string()), 2);

  // A one-cell memory (a single KB fact) puts all cell attention on it.
  spit(dir_ / "one.txt", "1 r1 r_phone p1\n2 hello\thello what can i help you with today\n");
  const fs::path one = dir_ / "attn_one";
  ASSERT_EQ(run("dump-attention --checkpoint " + (dir_ / "run" / "checkpoint.best").string() +
                " --corpus " + (dir_ / "one.txt").string() + " --dialog 1 --turn 1 --out " +
                one.string()),
            0);
  const auto k = nlohmann::json::parse(slurp(one / "attention.json"));
  ASSERT_EQ(k["memory"].size(), 1u);
  for (const auto& step : k["steps"]) EXPECT_EQ(step["alpha"][0].get<double>(), 1.0);
}

TEST_F(CliTest, ChatEofIsSilent) {
  const std::string cmd = "echo -n | " + std::string(BOSSNET_CLI) + " chat --checkpoint " +
                          (dir_ / "run" / "checkpoint.best").string() + " > " +
                          (dir_ / "chat.out").string();
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(slurp(dir_ / "chat.out").empty());

  spit(dir_ / "kb.txt", "resto_x r_cuisine thai\n");
  const std::string talk = "printf 'hello\\n' | " + std::string(BOSSNET_CLI) +
                           " chat --checkpoint " + (dir_ / "run" / "checkpoint.best").string() +
                           " --kb " + (dir_ / "kb.txt").string() + " > " +
                           (dir_ / "chat2.out").string();
  EXPECT_EQ(std::system(talk.c_str()), 0);
  const auto text = slurp(dir_ / "chat2.out");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
}

}  // namespace
}  // namespace bossnet
