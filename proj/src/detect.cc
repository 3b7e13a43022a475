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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "manipgen/errors.h"
#include "manipgen/rng.h"
#include "manipgen/unicode.h"

namespace manipgen {
namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

constexpr int kModelVersion = 1;

std::array<double, 2> Softmax(double z0, double z1) {
  const double m = std::max(z0, z1);
  const double e0 = std::exp(z0 - m);
  const double e1 = std::exp(z1 - m);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

double SafeDiv(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

uint32_t HashNgram(std::string_view ngram) {
  return static_cast<uint32_t>(Fnv1a64(ngram) & (kFeatureBuckets - 1));
}

uint64_t FeatureVector::Total() const {
  uint64_t total = 0;
  for (const auto& [bucket, count] : entries) total += count;
  return total;
}

uint32_t FeatureVector::Count(uint32_t bucket) const {
  auto it = std::lower_bound(
      entries.begin(), entries.end(), bucket,
      [](const auto& e, uint32_t b) { return e.first < b; });
  return it != entries.end() && it->first == bucket ? it->second : 0;
}

FeatureVector Featurize(std::string_view text, NgramRange range) {
  if (range.low < 1 || range.low > range.high || range.high > 6) {
    throw Error("n-gram range must satisfy 1 <= low <= high <= 6");
  }
  FeatureVector fv;
  if (text.empty()) return fv;
  // Byte offset of every code point, plus the end.
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) starts.push_back(i);
  }
  const std::size_t len = starts.size();
  starts.push_back(text.size());

  std::vector<uint32_t> buckets;
  for (int n = range.low; n <= range.high; ++n) {
    const auto un = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + un <= len; ++i) {
      buckets.push_back(HashNgram(text.substr(starts[i], starts[i + un] - starts[i])));
    }
  }
  std::sort(buckets.begin(), buckets.end());
  for (uint32_t b : buckets) {
    if (!fv.entries.empty() && fv.entries.back().first == b) {
      ++fv.entries.back().second;
    } else {
      fv.entries.emplace_back(b, 1);
    }
  }
  return fv;
}

LinearModel::LinearModel(std::array<std::string, 2> classes, NgramRange ngrams)
    : classes_(std::move(classes)),
      ngrams_(ngrams),
      weights_(2 * static_cast<std::size_t>(kFeatureBuckets), 0.0) {
  if (classes_[0] == classes_[1]) throw Error("model needs two distinct classes");
}

int LinearModel::ClassIndex(std::string_view label) const {
  if (label == classes_[0]) return 0;
  if (label == classes_[1]) return 1;
  throw Error("label '" + std::string(label) + "' is not a model class");
}

Example LinearModel::Prepare(std::string_view text) const {
  const FeatureVector fv = Featurize(text, ngrams_);
  double norm = 0.0;
  for (const auto& [b, c] : fv.entries) norm += static_cast<double>(c) * c;
  norm = std::sqrt(norm);
  Example ex;
  ex.x.reserve(fv.entries.size());
  for (const auto& [b, c] : fv.entries) ex.x.emplace_back(b, c / norm);
  return ex;
}

std::array<double, 2> LinearModel::Probabilities(const Example& example) const {
  double z0 = bias_[0];
  double z1 = bias_[1];
  for (const auto& [b, v] : example.x) {
    z0 += weight(0, b) * v;
    z1 += weight(1, b) * v;
  }
  return Softmax(z0, z1);
}

std::string LinearModel::Predict(std::string_view text) const {
  const auto p = Probabilities(Prepare(text));
  // Ties go to the first class.
  return p[1] > p[0] ? classes_[1] : classes_[0];
}

OrderedJson LinearModel::ToJson() const {
  OrderedJson obj;
  obj["format"] = "manipgen-linear";
  obj["version"] = kModelVersion;
  obj["classes"] = {classes_[0], classes_[1]};
  obj["feature_hash"] = "fnv1a64-low18";
  obj["buckets"] = kFeatureBuckets;
  obj["ngram_low"] = ngrams_.low;
  obj["ngram_high"] = ngrams_.high;
  obj["epochs"] = trained_with.epochs;
  obj["learning_rate"] = trained_with.learning_rate;
  obj["seed"] = trained_with.seed;
  obj["bias"] = {bias_[0], bias_[1]};
  OrderedJson weights = OrderedJson::array();
  for (uint32_t b = 0; b < kFeatureBuckets; ++b) {
    if (weight(0, b) != 0.0 || weight(1, b) != 0.0) {
      weights.push_back({b, weight(0, b), weight(1, b)});
    }
  }
  obj["weights"] = std::move(weights);
  return obj;
}

LinearModel LinearModel::FromJson(const Json& obj) {
  try {
    if (obj.at("format") != "manipgen-linear") throw Error("not a manipgen model");
    if (obj.at("version").get<int>() != kModelVersion) {
      throw Error("unsupported model version");
    }
    if (obj.at("buckets").get<uint32_t>() != kFeatureBuckets) {
      throw Error("model uses a different feature space");
    }
    const auto& classes = obj.at("classes");
    NgramRange ngrams{obj.at("ngram_low").get<int>(), obj.at("ngram_high").get<int>()};
    LinearModel model({classes.at(0).get<std::string>(), classes.at(1).get<std::string>()},
                      ngrams);
    model.trained_with.epochs = obj.at("epochs").get<int>();
    model.trained_with.learning_rate = obj.at("learning_rate").get<double>();
    model.trained_with.seed = obj.at("seed").get<uint64_t>();
    model.trained_with.ngrams = ngrams;
    model.bias_ = {obj.at("bias").at(0).get<double>(), obj.at("bias").at(1).get<double>()};
    for (const auto& row : obj.at("weights")) {
      const auto b = row.at(0).get<uint32_t>();
      if (b >= kFeatureBuckets) throw Error("weight bucket out of range");
      model.weight(0, b) = row.at(1).get<double>();
      model.weight(1, b) = row.at(2).get<double>();
    }
    return model;
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed model: ") + e.what());
  }
}

void LinearModel::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << ToJson().dump() << '\n';
  if (!out) throw Error("write failed: " + path);
}

LinearModel LinearModel::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model: " + path);
  try {
    return FromJson(Json::parse(in));
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed model: ") + e.what());
  }
}

double MeanLoss(const LinearModel& model, const std::vector<Example>& examples) {
  if (examples.empty()) return 0.0;
  double total = 0.0;
  for (const Example& ex : examples) {
    const auto p = model.Probabilities(ex);
    total -= std::log(std::max(p[ex.y], 1e-300));
  }
  return total / static_cast<double>(examples.size());
}

Gradient LossGradient(const LinearModel& model, const std::vector<Example>& examples) {
  Gradient g;
  if (examples.empty()) return g;
  const double scale = 1.0 / static_cast<double>(examples.size());
  for (const Example& ex : examples) {
    const auto p = model.Probabilities(ex);
    for (int c = 0; c < 2; ++c) {
      const double delta = (p[c] - (ex.y == c ? 1.0 : 0.0)) * scale;
      g.bias[c] += delta;
      for (const auto& [b, v] : ex.x) g.weights[b][c] += delta * v;
    }
  }
  return g;
}

TrainResult TrainLinear(const std::vector<LabeledText>& train,
                        const TrainOptions& options) {
  if (options.epochs < 0) throw Error("epochs must be non-negative");
  if (!(options.learning_rate > 0.0)) throw Error("learning rate must be positive");
  std::set<std::string> labels;
  for (const auto& item : train) labels.insert(item.label);
  if (train.size() < 2 || labels.size() != 2) {
    throw Error("training needs at least two examples covering exactly two classes (got " +
                std::to_string(labels.size()) + " classes)");
  }
  LinearModel model({*labels.begin(), *std::next(labels.begin())}, options.ngrams);
  model.trained_with = options;

  std::vector<Example> examples;
  examples.reserve(train.size());
  for (const auto& item : train) {
    Example ex = model.Prepare(item.text);
    ex.y = model.ClassIndex(item.label);
    examples.push_back(std::move(ex));
  }

  TrainResult result{std::move(model), {}};
  LinearModel& m = result.model;
  result.loss_history.push_back(MeanLoss(m, examples));
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(DeriveSeed(options.seed, "train-linear"));
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.Shuffle(order);
    for (std::size_t i : order) {
      const Example& ex = examples[i];
      const auto p = m.Probabilities(ex);
      for (int c = 0; c < 2; ++c) {
        const double step = options.learning_rate * (p[c] - (ex.y == c ? 1.0 : 0.0));
        m.bias(c) -= step;
        for (const auto& [b, v] : ex.x) m.weight(c, b) -= step * v;
      }
    }
    result.loss_history.push_back(MeanLoss(m, examples));
  }
  return result;
}

EvalReport Evaluate(const std::vector<std::string>& predictions,
                    const std::vector<std::string>& golds,
                    std::vector<std::string> classes) {
  if (predictions.size() != golds.size()) {
    throw Error("predictions and golds differ in length");
  }
  if (golds.empty()) throw Error("nothing to evaluate");
  if (classes.empty()) {
    std::set<std::string> seen(golds.begin(), golds.end());
    seen.insert(predictions.begin(), predictions.end());
    classes.assign(seen.begin(), seen.end());
  }
  const std::set<std::string> declared(classes.begin(), classes.end());

  EvalReport report;
  report.classes = classes;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (!declared.count(golds[i]) || !declared.count(predictions[i])) {
      throw Error("label outside the declared classes");
    }
    ++report.confusion[golds[i]][predictions[i]];
    correct += golds[i] == predictions[i];
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(golds.size());

  double f1_sum = 0.0;
  for (const std::string& c : classes) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < golds.size(); ++i) {
      const bool g = golds[i] == c;
      const bool p = predictions[i] == c;
      tp += g && p;
      fp += !g && p;
      fn += g && !p;
    }
    ClassMetrics m;
    m.support = tp + fn;
    m.precision = SafeDiv(static_cast<double>(tp), static_cast<double>(tp + fp));
    m.recall = SafeDiv(static_cast<double>(tp), static_cast<double>(tp + fn));
    m.f1 = SafeDiv(2.0 * m.precision * m.recall, m.precision + m.recall);
    f1_sum += m.f1;
    report.per_class[c] = m;
  }
  report.macro_f1 = f1_sum / static_cast<double>(classes.size());
  return report;
}

OrderedJson EvalReport::ToJson() const {
  OrderedJson obj;
  obj["accuracy"] = accuracy;
  obj["macro_f1"] = macro_f1;
  obj["classes"] = classes;
  OrderedJson per = OrderedJson::object();
  for (const auto& c : classes) {
    const ClassMetrics& m = per_class.at(c);
    per[c] = {{"precision", m.precision},
              {"recall", m.recall},
              {"f1", m.f1},
              {"support", m.support}};
  }
  obj["per_class"] = std::move(per);
  obj["confusion"] = confusion;
  return obj;
}

std::vector<ClaimRecord> ParseClaims(std::istream& in) {
  std::vector<ClaimRecord> claims;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(line_no, "expected label<TAB>text");
    ClaimRecord claim;
    claim.label = line.substr(0, tab);
    if (claim.label != "true" && claim.label != "fake") {
      throw ParseError(line_no, "unknown label '" + claim.label + "'");
    }
    if (!IsValidUtf8(line)) throw ParseError(line_no, "invalid UTF-8");
    claim.text = ToNfc(line.substr(tab + 1));
    if (claim.text.find_first_not_of(" \t") == std::string::npos) {
      throw ParseError(line_no, "empty claim text");
    }
    claims.push_back(std::move(claim));
  }
  return claims;
}

std::vector<ClaimRecord> LoadClaims(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open claims file: " + path);
  return ParseClaims(in);
}

TrainingSetting ParseSetting(std::string_view name) {
  if (name == "baseline") return TrainingSetting::kBaseline;
  if (name == "zero_shot" || name == "zero-shot") return TrainingSetting::kZeroShot;
  if (name == "augment") return TrainingSetting::kAugment;
  throw Error("unknown setting: " + std::string(name));
}

std::string_view SettingName(TrainingSetting setting) {
  switch (setting) {
    case TrainingSetting::kBaseline:
      return "baseline";
    case TrainingSetting::kZeroShot:
      return "zero_shot";
    case TrainingSetting::kAugment:
      return "augment";
  }
  return "";
}

std::vector<LabeledText> ComposeTraining(
    TrainingSetting setting, const std::optional<std::vector<ClaimRecord>>& gold,
    const std::vector<DatasetRecord>& generated, const ComposeOptions& options) {
  const bool wants_gold = setting != TrainingSetting::kZeroShot;
  if (wants_gold && !gold) {
    throw Error(std::string(SettingName(setting)) + " requires gold training data");
  }
  if (!wants_gold && gold) throw Error("zero_shot must not use gold training data");

  std::vector<LabeledText> out;
  if (gold) {
    for (const auto& c : *gold) out.push_back({c.text, c.label});
  }
  if (setting == TrainingSetting::kBaseline) return out;

  if (options.factor == 0) throw Error("factor must be positive");
  if (generated.empty()) throw Error("no generated records to add");
  const std::string machine_label = options.invert_mapping ? "true" : "fake";
  const std::string human_label = options.invert_mapping ? "fake" : "true";
  const auto relabel = [&](const DatasetRecord& r) {
    return LabeledText{r.text, r.label == Origin::kMachine ? machine_label : human_label};
  };

  const std::size_t base = options.base_size.value_or(generated.size());
  const std::size_t target = options.factor * base;
  std::vector<std::size_t> picks(generated.size());
  std::iota(picks.begin(), picks.end(), 0);
  if (generated.size() >= target) {
    if (target < generated.size()) {
      Rng rng(DeriveSeed(options.seed, "compose-sample"));
      rng.Shuffle(picks);
      picks.resize(target);
      std::sort(picks.begin(), picks.end());
    }
  } else {
    for (std::size_t i = generated.size(); i < target; ++i) {
      picks.push_back(i % generated.size());
    }
  }
  for (std::size_t i : picks) out.push_back(relabel(generated[i]));
  return out;
}

void WriteLabeledJsonl(const std::vector<LabeledText>& items, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  for (const auto& item : items) {
    out << OrderedJson{{"text", item.text}, {"label", item.label}}.dump() << '\n';
  }
  if (!out) throw Error("write failed: " + path);
}

std::vector<LabeledText> ReadLabeledJsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::vector<LabeledText> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json obj = Json::parse(line);
      items.push_back({obj.at("text").get<std::string>(), obj.at("label").get<std::string>()});
    } catch (const Json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return items;
}

}  // namespace manipgen
