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

// Baseline detector: hashed character n-grams and a two-class logistic
// (softmax) model trained with seeded SGD.

#ifndef MANIPGEN_DETECT_H_
#define MANIPGEN_DETECT_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "manipgen/datagen.h"

namespace manipgen {

inline constexpr uint32_t kFeatureBits = 18;
inline constexpr uint32_t kFeatureBuckets = 1u << kFeatureBits;

struct NgramRange {
  int low = 2;
  int high = 4;
};

// Bucket of one n-gram: low 18 bits of FNV-1a 64 over its UTF-8 bytes.
uint32_t HashNgram(std::string_view ngram);

struct FeatureVector {
  // (bucket, count), sorted by bucket, counts positive.
  std::vector<std::pair<uint32_t, uint32_t>> entries;

  uint64_t Total() const;
  uint32_t Count(uint32_t bucket) const;
};

// Counts of all code-point n-grams with low <= n <= high. Throws Error
// unless 1 <= low <= high <= 6.
FeatureVector Featurize(std::string_view text, NgramRange range);

struct LabeledText {
  std::string text;
  std::string label;

  bool operator==(const LabeledText&) const = default;
};

// L2-normalised feature values; the model's input.
struct Example {
  std::vector<std::pair<uint32_t, double>> x;
  int y = 0;
};

struct TrainOptions {
  int epochs = 10;
  double learning_rate = 0.5;
  uint64_t seed = 0;
  NgramRange ngrams;
};

class LinearModel {
 public:
  LinearModel(std::array<std::string, 2> classes, NgramRange ngrams);

  const std::array<std::string, 2>& classes() const { return classes_; }
  NgramRange ngrams() const { return ngrams_; }

  double weight(int cls, uint32_t bucket) const {
    return weights_[static_cast<std::size_t>(cls) * kFeatureBuckets + bucket];
  }
  double& weight(int cls, uint32_t bucket) {
    return weights_[static_cast<std::size_t>(cls) * kFeatureBuckets + bucket];
  }
  double bias(int cls) const { return bias_[cls]; }
  double& bias(int cls) { return bias_[cls]; }

  // Class probabilities.
  std::array<double, 2> Probabilities(const Example& example) const;
  Example Prepare(std::string_view text) const;
  std::string Predict(std::string_view text) const;

  int ClassIndex(std::string_view label) const;

  // Training metadata echoed into model files.
  TrainOptions trained_with;

  nlohmann::ordered_json ToJson() const;
  static LinearModel FromJson(const nlohmann::json& obj);
  void Save(const std::string& path) const;
  static LinearModel Load(const std::string& path);

  bool operator==(const LinearModel& other) const {
    return classes_ == other.classes_ && bias_ == other.bias_ &&
           weights_ == other.weights_;
  }

 private:
  std::array<std::string, 2> classes_;
  NgramRange ngrams_;
  std::vector<double> weights_;
  std::array<double, 2> bias_{0.0, 0.0};
};

// Mean cross-entropy of the model over examples.
double MeanLoss(const LinearModel& model, const std::vector<Example>& examples);

struct Gradient {
  std::map<uint32_t, std::array<double, 2>> weights;  // touched buckets only
  std::array<double, 2> bias{0.0, 0.0};
};

// Analytic gradient of MeanLoss.
Gradient LossGradient(const LinearModel& model,
                      const std::vector<Example>& examples);

struct TrainResult {
  LinearModel model;
  // Mean training loss before training, then after every epoch.
  std::vector<double> loss_history;
};

// Classes are the two distinct labels in sorted order. Throws Error unless
// there are at least two examples covering exactly two labels.
TrainResult TrainLinear(const std::vector<LabeledText>& train,
                        const TrainOptions& options);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvalReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<std::string> classes;
  std::map<std::string, ClassMetrics> per_class;
  std::map<std::string, std::map<std::string, std::size_t>> confusion;  // gold -> predicted

  nlohmann::ordered_json ToJson() const;
};

// Standard accuracy and macro F1 over `classes` (every declared class
// contributes to the macro mean, with F1 = 0 when it never occurs). When
// `classes` is empty, the sorted union of observed labels is used. Throws
// Error on length mismatch, empty input or an undeclared label.
EvalReport Evaluate(const std::vector<std::string>& predictions,
                    const std::vector<std::string>& golds,
                    std::vector<std::string> classes = {});

struct ClaimRecord {
  std::string text;
  std::string label;  // "true" or "fake"
};

// TSV `label<TAB>text`. Throws ParseError on unknown labels or empty text.
std::vector<ClaimRecord> LoadClaims(const std::string& path);
std::vector<ClaimRecord> ParseClaims(std::istream& in);

enum class TrainingSetting { kBaseline, kZeroShot, kAugment };

TrainingSetting ParseSetting(std::string_view name);
std::string_view SettingName(TrainingSetting setting);

struct ComposeOptions {
  std::size_t factor = 1;
  // Size the factor multiplies; defaults to the number of generated records.
  std::optional<std::size_t> base_size;
  // Default maps machine -> fake, human -> true.
  bool invert_mapping = false;
  uint64_t seed = 0;
};

// baseline: gold only. zero_shot: generated only (gold must be absent).
// augment: gold followed by generated. Generated records are relabeled to
// true/fake and scaled to factor * base_size: sampled without replacement
// when enough exist, otherwise repeated in order.
std::vector<LabeledText> ComposeTraining(
    TrainingSetting setting, const std::optional<std::vector<ClaimRecord>>& gold,
    const std::vector<DatasetRecord>& generated, const ComposeOptions& options);

void WriteLabeledJsonl(const std::vector<LabeledText>& items,
                       const std::string& path);
std::vector<LabeledText> ReadLabeledJsonl(const std::string& path);

}  // namespace manipgen

#endif  // MANIPGEN_DETECT_H_
