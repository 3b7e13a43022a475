//
// Copyright 2026 The manipgen Authors
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
//

// Runs the manipgen binary end to end.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "manipgen/annotation.h"
#include "manipgen/corpus.h"
#include "manipgen/datagen.h"
#include "manipgen/detect.h"
#include "tests/testing/toy_data.h"

namespace manipgen {
namespace {

using Json = nlohmann::json;

int RunCli(const std::string& args, const std::string& env = "") {
  const std::string cmd =
      env + " " + MANIPGEN_CLI_PATH + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Json ReadJson(const std::string& path) { return Json::parse(testing::ReadFile(path)); }

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new std::string(testing::MakeTempDir("manipgen-cli"));
    testing::WriteToyData(testing::MakeToyData({.seed = 3, .sentences = 150}), *dir_);
  }
  static void TearDownTestSuite() {
    std::filesystem::remove_all(*dir_);
    delete dir_;
  }

  static std::string Path(const std::string& name) { return *dir_ + "/" + name; }
  static std::string Inputs() {
    return "--corpus " + Path("corpus.tsv") + " --vectors " + Path("vectors.vec");
  }

  static std::string* dir_;
};

std::string* CliTest::dir_ = nullptr;

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(RunCli(""), 2);
  EXPECT_EQ(RunCli("frobnicate"), 2);
  EXPECT_EQ(RunCli("generate --corpus " + Path("corpus.tsv")), 2);
  EXPECT_EQ(RunCli("generate " + Inputs() + " --out " + Path("bad") + " --mode sometimes"), 2);
  EXPECT_EQ(RunCli("--help"), 0);
  EXPECT_EQ(RunCli("generate --help"), 0);
}

TEST_F(CliTest, MissingInputExitsOne) {
  EXPECT_EQ(RunCli("generate --corpus " + Path("nope.tsv") + " --vectors " + Path("vectors.vec") +
                " --out " + Path("missing")),
            1);
  EXPECT_EQ(RunCli("stats --dataset " + Path("nope.jsonl") + " --out " + Path("missing2")), 1);
}

TEST_F(CliTest, GenerateIsReproducibleAndRecordsProvenance) {
  const std::string args = "generate " + Inputs() + " --seed 4 --per-class 60 --workers ";
  ASSERT_EQ(RunCli(args + "1 --out " + Path("g1")), 0);
  ASSERT_EQ(RunCli(args + "3 --out " + Path("g2")), 0);
  const std::string data = testing::ReadFile(Path("g1/dataset.jsonl"));
  EXPECT_EQ(data, testing::ReadFile(Path("g2/dataset.jsonl")));
  EXPECT_EQ(testing::ReadFile(Path("g1/stats.json")), testing::ReadFile(Path("g2/stats.json")));
  const auto records = ReadJsonlFile(Path("g1/dataset.jsonl"));
  EXPECT_EQ(records.size(), 120u);

  const Json config = ReadJson(Path("g1/config.json"));
  EXPECT_EQ(config["command"], "generate");
  EXPECT_EQ(config["seed"], 4);
  const Json manifest = ReadJson(Path("g1/manifest.json"));
  ASSERT_EQ(manifest["inputs"].size(), 2u);
  for (const auto& input : manifest["inputs"]) {
    EXPECT_EQ(input["sha256"].get<std::string>().size(), 64u);
    EXPECT_GT(input["bytes"].get<int>(), 0);
  }
  EXPECT_EQ(manifest["inputs"][0]["sha256"], ReadJson(Path("g2/manifest.json"))["inputs"][0]["sha256"]);

  ASSERT_EQ(RunCli("stats --dataset " + Path("g1/dataset.jsonl") + " --out " + Path("st")), 0);
  const Json stats = ReadJson(Path("st/stats.json"));
  EXPECT_EQ(stats["per_label"]["machine"], 60);
  EXPECT_EQ(stats["per_pos"], ReadJson(Path("g1/stats.json"))["per_pos"]);
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  WriteText(Path("gen.json"), Json{{"seed", 3}, {"per-class", 20}}.dump());
  ASSERT_EQ(RunCli("--config " + Path("gen.json") + " generate " + Inputs() + " --seed 9 --out " +
                Path("cfg")),
            0);
  const Json config = ReadJson(Path("cfg/config.json"));
  EXPECT_EQ(config["seed"], 9);
  EXPECT_EQ(config["per_class"], 20);
  EXPECT_EQ(ReadJsonlFile(Path("cfg/dataset.jsonl")).size(), 40u);
  WriteText(Path("bad.json"), Json{{"sed", 3}}.dump());
  EXPECT_EQ(RunCli("--config " + Path("bad.json") + " generate " + Inputs() + " --out " + Path("cfg2")),
            2);
}

TEST_F(CliTest, DataDirResolvesRelativeInputs) {
  EXPECT_EQ(RunCli("generate --corpus corpus.tsv --vectors vectors.vec --per-class 5 --out " +
                    Path("envrun"),
                "MANIPGEN_DATA_DIR=" + *dir_),
            0);
  EXPECT_EQ(ReadJsonlFile(Path("envrun/dataset.jsonl")).size(), 10u);
}

TEST_F(CliTest, SplitArticles) {
  std::vector<Article> articles(20);
  for (std::size_t i = 0; i < articles.size(); ++i) {
    articles[i].title = "عنوان " + std::to_string(i);
    articles[i].content = "محتوى";
    articles[i].url = "https://example.org/" + std::to_string(i);
    articles[i].date = "2020-01-01";
    articles[i].topic = i % 2 ? "Sports" : "Heath";
  }
  {
    std::ofstream out(Path("articles.jsonl"), std::ios::binary);
    WriteArticlesJsonl(articles, out);
  }
  ASSERT_EQ(RunCli("split --articles " + Path("articles.jsonl") + " --category-map " +
                std::string(MANIPGEN_SOURCE_DIR) + "/data/category_map.tsv --out " + Path("sp")),
            0);
  const Json stats = ReadJson(Path("sp/split_stats.json"));
  EXPECT_EQ(stats["train"], 16);
  EXPECT_EQ(stats["dev"], 2);
  EXPECT_EQ(stats["test"], 2);
  EXPECT_NE(testing::ReadFile(Path("sp/train.jsonl")).find("Health"), std::string::npos);
}

TEST_F(CliTest, StudyAndAgreement) {
  ASSERT_EQ(RunCli("generate " + Inputs() + " --seed 1 --out " + Path("gs")), 0);
  ASSERT_EQ(RunCli("sample-study --dataset " + Path("gs/dataset.jsonl") +
                " --n-human 10 --n-machine 12 --out " + Path("study")),
            0);
  const auto tasks = ReadTasksJsonl(Path("study/tasks.jsonl"));
  ASSERT_EQ(tasks.size(), 34u);

  // Crafted logs: annotator "a" and "b" differ on one stage-1 task; "a"
  // relabels a task, so only the latest value counts.
  std::vector<std::string> va, vb;
  std::string log_a, log_b;
  for (std::size_t i = 0; i < 22; ++i) {
    const std::string id = tasks[i].task_id;
    const std::string gold(OriginName(tasks[i].gold_origin));
    const std::string other = gold == "human" ? "machine" : "human";
    const std::string b_value = i == 3 ? other : gold;
    if (i == 0) log_a += Json{{"task_id", id}, {"annotator_id", "a"}, {"stage", 1}, {"value", other}}.dump() + "\n";
    log_a += Json{{"task_id", id}, {"annotator_id", "a"}, {"stage", 1}, {"value", gold}}.dump() + "\n";
    log_b += Json{{"task_id", id}, {"annotator_id", "b"}, {"stage", 1}, {"value", b_value}}.dump() + "\n";
    va.push_back(gold);
    vb.push_back(b_value);
  }
  WriteText(Path("a.jsonl"), log_a);
  WriteText(Path("b.jsonl"), log_b);
  ASSERT_EQ(RunCli("agreement --labels " + Path("a.jsonl") + " " + Path("b.jsonl") + " --out " +
                Path("agr")),
            0);
  const Json report = ReadJson(Path("agr/agreement.json"));
  EXPECT_EQ(report["status"], "ok");
  EXPECT_EQ(report["stage1"]["items"], 22);
  EXPECT_NEAR(report["stage1"]["kappa"].get<double>(), CohenKappa(va, vb), 1e-12);
  EXPECT_EQ(report["stage2"]["status"], "insufficient_data");

  ASSERT_EQ(RunCli("agreement --labels " + Path("a.jsonl") + " --out " + Path("agr1")), 0);
  EXPECT_EQ(ReadJson(Path("agr1/agreement.json"))["status"], "insufficient_data");
}

TEST_F(CliTest, TrainEvaluateAndCompose) {
  ASSERT_EQ(RunCli("generate " + Inputs() + " --seed 2 --out " + Path("gt")), 0);
  ASSERT_EQ(RunCli("train-baseline --train " + Path("gt/dataset.jsonl") + " --epochs 3 --out " +
                Path("model")),
            0);
  const Json model = ReadJson(Path("model/model.json"));
  EXPECT_EQ(model["format"], "manipgen-linear");
  ASSERT_EQ(RunCli("evaluate --model " + Path("model/model.json") + " --data " +
                Path("gt/dataset.jsonl") + " --out " + Path("eval")),
            0);
  const Json report = ReadJson(Path("eval/report.json"));
  EXPECT_GE(report["accuracy"].get<double>(), 0.0);
  EXPECT_LE(report["accuracy"].get<double>(), 1.0);

  WriteText(Path("claims.tsv"), "true\tخبر صحيح\nfake\tخبر كاذب\n");
  ASSERT_EQ(RunCli("compose-training --setting augment --gold " + Path("claims.tsv") +
                " --generated " + Path("gt/dataset.jsonl") + " --base-size 5 --factor 2 --out " +
                Path("comp")),
            0);
  EXPECT_EQ(ReadLabeledJsonl(Path("comp/train.jsonl")).size(), 12u);
  EXPECT_EQ(RunCli("compose-training --setting zero_shot --gold " + Path("claims.tsv") +
                " --generated " + Path("gt/dataset.jsonl") + " --out " + Path("comp2")),
            1);
  WriteText(Path("bad_claims.tsv"), "maybe\tخبر\n");
  EXPECT_EQ(RunCli("compose-training --setting baseline --gold " + Path("bad_claims.tsv") +
                " --out " + Path("comp3")),
            1);
}

}  // namespace
}  // namespace manipgen
