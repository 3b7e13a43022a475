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

#include "manipgen/detect.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "manipgen/errors.h"
#include "manipgen/rng.h"
#include "manipgen/unicode.h"
#include "tests/testing/toy_data.h"

namespace manipgen {
namespace {

TEST(FeaturizeTest, Examples) {
  const FeatureVector ab = Featurize("ab", {1, 2});
  EXPECT_EQ(ab.Total(), 3u);
  EXPECT_EQ(ab.Count(HashNgram("a")), 1u);
  EXPECT_EQ(ab.Count(HashNgram("ab")), 1u);
  const FeatureVector aaa = Featurize("aaa", {1, 3});
  EXPECT_EQ(aaa.Count(HashNgram("a")), 3u);
  EXPECT_EQ(aaa.Count(HashNgram("aa")), 2u);
  EXPECT_EQ(aaa.Count(HashNgram("aaa")), 1u);
  EXPECT_EQ(Featurize("a", {2, 4}).Total(), 0u);
  EXPECT_LT(HashNgram("محرز"), kFeatureBuckets);
  EXPECT_THROW(Featurize("ab", {0, 2}), Error);
  EXPECT_THROW(Featurize("ab", {3, 2}), Error);
  EXPECT_THROW(Featurize("ab", {1, 7}), Error);
}

TEST(FeaturizeTest, TotalsCountEveryNgramProperty) {
  Rng rng(10);
  const std::vector<std::string> letters = {"ا", "ب", " ", "x", "ت"};
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    for (std::size_t n = rng.Uniform(15); n > 0; --n) text += letters[rng.Uniform(letters.size())];
    const int low = 1 + static_cast<int>(rng.Uniform(3));
    const int high = low + static_cast<int>(rng.Uniform(3));
    const std::size_t len = CodePointLength(text);
    uint64_t expected = 0;
    for (int n = low; n <= high; ++n) {
      if (len >= static_cast<std::size_t>(n)) expected += len - n + 1;
    }
    const FeatureVector f = Featurize(text, {low, high});
    EXPECT_EQ(f.Total(), expected);
    EXPECT_TRUE(std::is_sorted(f.entries.begin(), f.entries.end()));
    for (const auto& [bucket, count] : f.entries) EXPECT_GT(count, 0u);
  }
}

TEST(FeaturizeTest, BigramsDistinguishPermutations) {
  // Same unigrams, different order.
  const FeatureVector a = Featurize("abc", {1, 1}), b = Featurize("cba", {1, 1});
  EXPECT_EQ(a.entries, b.entries);
  EXPECT_NE(Featurize("abc", {2, 2}).entries, Featurize("cba", {2, 2}).entries);
}

TEST(PrepareTest, UnitNorm) {
  const LinearModel model({"a", "b"}, {1, 3});
  const Example e = model.Prepare("محرز ينتقل");
  double norm = 0;
  for (const auto& [bucket, v] : e.x) norm += v * v;
  EXPECT_NEAR(norm, 1.0, 1e-12);
  EXPECT_TRUE(model.Prepare("").x.empty());
}

std::vector<Example> RandomExamples(const LinearModel& model, Rng& rng, std::size_t n) {
  const std::vector<std::string> words = {"محرز", "برشلونة", "مدريد", "لم", "ينتقل", "120"};
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    for (std::size_t k = 1 + rng.Uniform(4); k > 0; --k) text += words[rng.Uniform(words.size())] + " ";
    Example e = model.Prepare(text);
    e.y = static_cast<int>(rng.Uniform(2));
    out.push_back(std::move(e));
  }
  return out;
}

TEST(GradientTest, MatchesCentralDifferences) {
  Rng rng(3);
  LinearModel model({"fake", "true"}, {2, 3});
  const auto examples = RandomExamples(model, rng, 12);
  for (const auto& e : examples) {
    for (const auto& [bucket, v] : e.x) {
      model.weight(0, bucket) = rng.UniformReal() - 0.5;
      model.weight(1, bucket) = rng.UniformReal() - 0.5;
    }
  }
  model.bias(0) = 0.3;
  const Gradient grad = LossGradient(model, examples);
  const double h = 1e-6;
  const auto check = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = MeanLoss(model, examples);
    param = saved - h;
    const double down = MeanLoss(model, examples);
    param = saved;
    const double numeric = (up - down) / (2 * h);
    EXPECT_NEAR(analytic, numeric, 1e-5 * std::max(1.0, std::abs(numeric)));
  };
  std::size_t checked = 0;
  for (const auto& [bucket, g] : grad.weights) {
    for (int c = 0; c < 2; ++c) check(model.weight(c, bucket), g[c]);
    ++checked;
  }
  for (int c = 0; c < 2; ++c) check(model.bias(c), grad.bias[c]);
  EXPECT_GT(checked, 10u);
  // Untouched buckets have zero gradient.
  for (const auto& e : examples) {
    for (const auto& [bucket, v] : e.x) EXPECT_TRUE(grad.weights.count(bucket));
  }
}

std::vector<LabeledText> Separable() {
  return {{"ااااااا", "fake"}, {"ببببببب", "true"}};
}

TEST(TrainTest, SeparablePairIsLearned) {
  TrainOptions options;
  options.epochs = 20;
  const TrainResult result = TrainLinear(Separable(), options);
  EXPECT_EQ(result.model.classes()[0], "fake");
  EXPECT_EQ(result.model.Predict("ااااااا"), "fake");
  EXPECT_EQ(result.model.Predict("ببببببب"), "true");
  ASSERT_EQ(result.loss_history.size(), 21u);
  EXPECT_NEAR(result.loss_history[0], std::log(2.0), 1e-12);
  EXPECT_LT(result.loss_history.back(), 0.1);
}

TEST(TrainTest, SmallRateLossIsMonotone) {
  const testing::ToyData toy = testing::MakeToyData({.seed = 4, .sentences = 60});
  std::vector<LabeledText> train;
  for (std::size_t i = 0; i < toy.sentences.size(); ++i) {
    train.push_back({SentenceText(toy.sentences[i].tokens), i % 3 ? "true" : "fake"});
  }
  TrainOptions options;
  options.learning_rate = 0.01;
  options.epochs = 15;
  const auto history = TrainLinear(train, options).loss_history;
  for (std::size_t i = 1; i < history.size(); ++i) EXPECT_LE(history[i], history[i - 1] + 1e-12);
  EXPECT_LT(history.back(), history.front());
}

TEST(TrainTest, DeterministicPerSeed) {
  std::vector<LabeledText> train;
  Rng rng(8);
  for (int i = 0; i < 40; ++i) {
    train.push_back({"نص " + std::to_string(rng.Uniform(1000)), i % 2 ? "human" : "machine"});
  }
  TrainOptions options;
  options.seed = 5;
  EXPECT_EQ(TrainLinear(train, options).model, TrainLinear(train, options).model);
  options.seed = 6;
  const LinearModel other = TrainLinear(train, options).model;
  options.seed = 5;
  EXPECT_FALSE(TrainLinear(train, options).model == other);
}

TEST(TrainTest, Errors) {
  EXPECT_THROW(TrainLinear({{"a", "x"}, {"b", "x"}}, {}), Error);
  EXPECT_THROW(TrainLinear({{"a", "x"}}, {}), Error);
  EXPECT_THROW(TrainLinear({{"a", "x"}, {"b", "y"}, {"c", "z"}}, {}), Error);
  TrainOptions bad;
  bad.epochs = -1;
  EXPECT_THROW(TrainLinear(Separable(), bad), Error);
  bad = {};
  bad.learning_rate = -1;
  EXPECT_THROW(TrainLinear(Separable(), bad), Error);
}

TEST(ModelTest, SaveLoadRoundTrip) {
  TrainOptions options;
  options.ngrams = {1, 3};
  const LinearModel model = TrainLinear(Separable(), options).model;
  const std::string path = testing::MakeTempDir("model") + "/model.json";
  model.Save(path);
  const LinearModel loaded = LinearModel::Load(path);
  EXPECT_EQ(loaded, model);
  EXPECT_EQ(loaded.ngrams().low, 1);
  EXPECT_EQ(loaded.ngrams().high, 3);
  EXPECT_EQ(loaded.Predict("ااا"), model.Predict("ااا"));
  nlohmann::json broken = model.ToJson();
  broken["format"] = "other";
  EXPECT_THROW(LinearModel::FromJson(broken), Error);
}

TEST(EvaluateTest, Examples) {
  const EvalReport r = Evaluate({"h", "m", "m", "m"}, {"h", "h", "m", "m"});
  EXPECT_DOUBLE_EQ(r.accuracy, 0.75);
  EXPECT_NEAR(r.macro_f1, 11.0 / 15.0, 1e-12);
  EXPECT_EQ(r.confusion.at("h").at("m"), 1u);
  EXPECT_EQ(r.per_class.at("h").support, 2u);
  const EvalReport constant = Evaluate({"h", "h"}, {"h", "m"});
  EXPECT_NEAR(constant.macro_f1, 1.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(constant.per_class.at("m").precision, 0.0);
  const EvalReport perfect = Evaluate({"a", "b"}, {"a", "b"});
  EXPECT_DOUBLE_EQ(perfect.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(perfect.macro_f1, 1.0);
  EXPECT_DOUBLE_EQ(Evaluate({"a"}, {"a"}, {"a", "b"}).macro_f1, 0.5);
  EXPECT_THROW(Evaluate({"a"}, {"a", "b"}), Error);
  EXPECT_THROW(Evaluate({}, {}), Error);
  EXPECT_THROW(Evaluate({"c"}, {"a"}, {"a", "b"}), Error);
}

TEST(EvaluateTest, MatchesPairwiseCountOracleProperty) {
  Rng rng(77);
  const std::vector<std::string> labels = {"fake", "true", "other"};
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 2 + rng.Uniform(2), n = 1 + rng.Uniform(30);
    std::vector<std::string> golds, preds;
    for (std::size_t i = 0; i < n; ++i) {
      golds.push_back(labels[rng.Uniform(k)]);
      preds.push_back(rng.Uniform(2) ? golds.back() : labels[rng.Uniform(k)]);
    }
    const std::vector<std::string> classes(labels.begin(), labels.begin() + k);
    // Oracle via tp/fp/fn counting.
    double f1_sum = 0;
    std::size_t correct = 0;
    for (const auto& c : classes) {
      double tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < n; ++i) {
        tp += preds[i] == c && golds[i] == c;
        fp += preds[i] == c && golds[i] != c;
        fn += preds[i] != c && golds[i] == c;
      }
      f1_sum += tp > 0 ? 2 * tp / (2 * tp + fp + fn) : 0.0;
    }
    for (std::size_t i = 0; i < n; ++i) correct += preds[i] == golds[i];
    const EvalReport r = Evaluate(preds, golds, classes);
    EXPECT_NEAR(r.accuracy, static_cast<double>(correct) / n, 1e-12);
    EXPECT_NEAR(r.macro_f1, f1_sum / k, 1e-12);
  }
}

std::size_t ClaimsErrorLine(const std::string& text) {
  std::istringstream in(text);
  try {
    ParseClaims(in);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

TEST(ClaimsTest, ParsesAndReportsLines) {
  std::istringstream in("true\tالخبر صحيح\n\nfake\tخبر \xD8\xA7\xD9\x94\xD9\x83\xD8\xAB\xD8\xB1\r\n");
  const auto claims = ParseClaims(in);
  ASSERT_EQ(claims.size(), 2u);
  EXPECT_EQ(claims[0].label, "true");
  EXPECT_EQ(claims[1].text, "خبر أكثر");
  EXPECT_EQ(ClaimsErrorLine("true\tok\nmaybe\ttext\n"), 2u);
  EXPECT_EQ(ClaimsErrorLine("fake\t  \n"), 1u);
  EXPECT_EQ(ClaimsErrorLine("no tab here\n"), 1u);
  std::istringstream empty("");
  EXPECT_TRUE(ParseClaims(empty).empty());
  EXPECT_THROW(LoadClaims("/nonexistent/claims.tsv"), Error);
}

std::vector<DatasetRecord> Generated(std::size_t n) {
  std::vector<DatasetRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    DatasetRecord r;
    r.id = "g" + std::to_string(i);
    r.text = "نص " + std::to_string(i);
    if (i % 2) {
      r.label = Origin::kMachine;
      r.records = {{0, "a", "b", "ADJ", ManipulationKind::kEmbeddingSwap, 0, 0.1}};
    }
    out.push_back(r);
  }
  return out;
}

TEST(ComposeTest, SettingsAndSizes) {
  const std::vector<ClaimRecord> gold = {{"صحيح", "true"}, {"كاذب", "fake"}, {"صحيح ٢", "true"}};
  const auto generated = Generated(10);
  const auto baseline = ComposeTraining(TrainingSetting::kBaseline, gold, generated, {});
  ASSERT_EQ(baseline.size(), 3u);
  EXPECT_EQ(baseline[1].label, "fake");

  const auto zero = ComposeTraining(TrainingSetting::kZeroShot, std::nullopt, generated, {});
  ASSERT_EQ(zero.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(zero[i].label, i % 2 ? "fake" : "true");
    EXPECT_EQ(zero[i].text, generated[i].text);
  }
  ComposeOptions inverted;
  inverted.invert_mapping = true;
  EXPECT_EQ(ComposeTraining(TrainingSetting::kZeroShot, std::nullopt, generated, inverted)[1].label,
            "true");

  ComposeOptions scaled;
  scaled.factor = 2;
  scaled.base_size = 3;
  const auto augment = ComposeTraining(TrainingSetting::kAugment, gold, generated, scaled);
  ASSERT_EQ(augment.size(), 9u);
  EXPECT_EQ(augment[0].text, "صحيح");
  std::set<std::string> distinct;
  for (std::size_t i = 3; i < augment.size(); ++i) distinct.insert(augment[i].text);
  EXPECT_EQ(distinct.size(), 6u);  // sampled without replacement

  ComposeOptions repeat;
  repeat.factor = 3;
  const auto tripled = ComposeTraining(TrainingSetting::kZeroShot, std::nullopt, generated, repeat);
  ASSERT_EQ(tripled.size(), 30u);
  std::map<std::string, int> counts;
  for (const auto& t : tripled) ++counts[t.text];
  for (const auto& [text, c] : counts) EXPECT_EQ(c, 3) << text;
}

TEST(ComposeTest, Errors) {
  const auto generated = Generated(4);
  const std::vector<ClaimRecord> gold = {{"x", "true"}};
  EXPECT_THROW(ComposeTraining(TrainingSetting::kBaseline, std::nullopt, generated, {}), Error);
  EXPECT_THROW(ComposeTraining(TrainingSetting::kAugment, std::nullopt, generated, {}), Error);
  EXPECT_THROW(ComposeTraining(TrainingSetting::kZeroShot, gold, generated, {}), Error);
  EXPECT_EQ(ParseSetting("zero-shot"), TrainingSetting::kZeroShot);
  EXPECT_EQ(SettingName(ParseSetting("augment")), "augment");
  EXPECT_THROW(ParseSetting("fewshot"), Error);
}

TEST(LabeledJsonlTest, RoundTrip) {
  const std::vector<LabeledText> items = {{"نص \"مقتبس\"", "fake"}, {"a\tb", "true"}};
  const std::string path = testing::MakeTempDir("labeled") + "/train.jsonl";
  WriteLabeledJsonl(items, path);
  EXPECT_EQ(ReadLabeledJsonl(path), items);
}

}  // namespace
}  // namespace manipgen
