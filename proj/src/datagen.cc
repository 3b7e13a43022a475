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

#include "manipgen/datagen.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "manipgen/errors.h"
#include "manipgen/rng.h"

namespace manipgen {
namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

OrderedJson ManipulationToJson(const ManipulationRecord& r) {
  OrderedJson obj;
  obj["token_index"] = r.token_index;
  obj["original"] = r.original;
  obj["substitute"] = r.substitute;
  obj["pos"] = r.pos;
  obj["kind"] = KindName(r.kind);
  obj["rank"] = r.rank ? OrderedJson(*r.rank) : OrderedJson(nullptr);
  obj["ratio"] = r.ratio ? OrderedJson(*r.ratio) : OrderedJson(nullptr);
  return obj;
}

const Json& Field(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(std::string("missing field '") + key + "'");
  return *it;
}

std::string StringField(const Json& obj, const char* key) {
  const Json& v = Field(obj, key);
  if (!v.is_string()) throw Error(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

ManipulationRecord ManipulationFromJson(const Json& obj) {
  if (!obj.is_object()) throw Error("manipulation record must be an object");
  ManipulationRecord r;
  const Json& index = Field(obj, "token_index");
  if (!index.is_number_unsigned()) throw Error("token_index must be a non-negative integer");
  r.token_index = index.get<std::size_t>();
  r.original = StringField(obj, "original");
  r.substitute = StringField(obj, "substitute");
  r.pos = StringField(obj, "pos");
  r.kind = ParseKind(StringField(obj, "kind"));
  if (auto it = obj.find("rank"); it != obj.end() && !it->is_null()) {
    if (!it->is_number_unsigned()) throw Error("rank must be a non-negative integer");
    r.rank = it->get<std::size_t>();
  }
  if (auto it = obj.find("ratio"); it != obj.end() && !it->is_null()) {
    if (!it->is_number()) throw Error("ratio must be a number");
    r.ratio = it->get<double>();
  }
  if ((r.kind == ManipulationKind::kNegationDelete) != r.substitute.empty()) {
    throw Error("substitute must be empty exactly for negation_delete");
  }
  if (r.kind == ManipulationKind::kEmbeddingSwap && (!r.rank || !r.ratio)) {
    throw Error("embedding_swap requires rank and ratio");
  }
  return r;
}

std::vector<std::string> SplitOnSpace(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find(' ', start);
    if (end == std::string::npos) {
      parts.push_back(text.substr(start));
      break;
    }
    parts.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

// Result of manipulating one source sentence.
struct SourceOutcome {
  std::vector<ManipulatedSentence> variants;  // all, or the single sample
  std::vector<std::size_t> variant_numbers;   // index in the full list
};

template <typename Fn>
void ParallelFor(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&]() {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::string_view OriginName(Origin origin) {
  return origin == Origin::kHuman ? "human" : "machine";
}

Origin ParseOrigin(std::string_view name) {
  if (name == "human") return Origin::kHuman;
  if (name == "machine") return Origin::kMachine;
  throw Error("unknown label: " + std::string(name));
}

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kDev:
      return "dev";
    case Split::kTest:
      return "test";
  }
  return "";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  throw Error("unknown split: " + std::string(name));
}

OrderedJson RecordToJson(const DatasetRecord& record) {
  OrderedJson obj;
  obj["id"] = record.id;
  obj["source_id"] = record.source_id;
  obj["text"] = record.text;
  obj["label"] = OriginName(record.label);
  OrderedJson records = OrderedJson::array();
  for (const auto& r : record.records) records.push_back(ManipulationToJson(r));
  obj["records"] = std::move(records);
  obj["split"] = SplitName(record.split);
  return obj;
}

DatasetRecord RecordFromJson(const Json& obj) {
  if (!obj.is_object()) throw Error("record must be a JSON object");
  DatasetRecord r;
  r.id = StringField(obj, "id");
  r.source_id = StringField(obj, "source_id");
  r.text = StringField(obj, "text");
  r.label = ParseOrigin(StringField(obj, "label"));
  const Json& records = Field(obj, "records");
  if (!records.is_array()) throw Error("field 'records' must be an array");
  for (const Json& m : records) r.records.push_back(ManipulationFromJson(m));
  r.split = ParseSplit(StringField(obj, "split"));
  if (r.id.empty()) throw Error("empty record id");
  if ((r.label == Origin::kHuman) != r.records.empty()) {
    throw Error("human records carry no manipulations; machine records do");
  }
  return r;
}

void WriteJsonl(const std::vector<DatasetRecord>& records, std::ostream& out) {
  for (const auto& r : records) out << RecordToJson(r).dump() << '\n';
}

void WriteJsonlFile(const std::vector<DatasetRecord>& records,
                    const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  WriteJsonl(records, out);
  out.flush();
  if (!out) throw Error("write failed: " + path);
}

std::vector<DatasetRecord> ReadJsonl(std::istream& in) {
  std::vector<DatasetRecord> records;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      DatasetRecord r = RecordFromJson(Json::parse(line));
      if (!ids.insert(r.id).second) throw Error("duplicate id '" + r.id + "'");
      records.push_back(std::move(r));
    } catch (const Json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return records;
}

std::vector<DatasetRecord> ReadJsonlFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset: " + path);
  return ReadJsonl(in);
}

SummaryStats Summarize(std::vector<double> values) {
  SummaryStats s;
  s.count = values.size();
  if (values.empty()) return s;
  s.average = std::accumulate(values.begin(), values.end(), 0.0) /
              static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  s.median = values.size() % 2 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
  return s;
}

DatasetStats PosStatistics(const std::vector<DatasetRecord>& records) {
  DatasetStats stats;
  std::map<std::string, std::vector<double>> excluded;
  for (const DatasetRecord& record : records) {
    const std::string label(OriginName(record.label));
    const std::string split(SplitName(record.split));
    ++stats.per_label[label];
    ++stats.per_split[split];
    ++stats.per_label_split[label][split];
    for (const ManipulationRecord& m : record.records) {
      ++stats.per_pos[m.pos].manipulations;
      switch (m.kind) {
        case ManipulationKind::kEmbeddingSwap:
          excluded[m.pos].push_back(static_cast<double>(m.rank.value_or(0)));
          break;
        case ManipulationKind::kNumberRandomize:
          excluded[m.pos].push_back(0.0);
          break;
        case ManipulationKind::kNegationDelete:
          break;
      }
    }
  }
  for (auto& [pos, values] : excluded) {
    stats.per_pos[pos].excluded = Summarize(std::move(values));
  }
  return stats;
}

OrderedJson DatasetStats::ToJson() const {
  OrderedJson out;
  OrderedJson pos = OrderedJson::object();
  for (const auto& [tag, s] : per_pos) {
    OrderedJson row;
    row["count"] = s.manipulations;
    if (s.excluded) {
      row["excluded_avg"] = s.excluded->average;
      row["excluded_median"] = s.excluded->median;
    } else {
      row["excluded_avg"] = nullptr;
      row["excluded_median"] = nullptr;
    }
    pos[tag] = std::move(row);
  }
  out["per_pos"] = std::move(pos);
  out["per_label"] = per_label;
  out["per_split"] = per_split;
  out["per_label_split"] = per_label_split;
  return out;
}

BuildResult BuildDataset(const std::vector<Sentence>& sentences,
                         const NeighborSource& index,
                         const BuildOptions& options) {
  options.manipulation.Validate();
  ValidateRatios(options.ratios);
  if (options.per_class && *options.per_class == 0) {
    throw Error("per_class must be positive");
  }

  std::vector<const Sentence*> sorted;
  sorted.reserve(sentences.size());
  for (const Sentence& s : sentences) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(),
            [](const Sentence* a, const Sentence* b) { return a->id < b->id; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i - 1]->id == sorted[i]->id) {
      throw Error("duplicate sentence id '" + sorted[i]->id + "'");
    }
  }

  const uint64_t seed = options.manipulation.seed;
  const bool balanced = options.mode == BuildMode::kBalanced;
  std::vector<SourceOutcome> outcomes(sorted.size());
  ParallelFor(sorted.size(), options.workers, [&](std::size_t i) {
    const Sentence& s = *sorted[i];
    std::vector<ManipulatedSentence> all =
        GenerateVariants(s, index, options.manipulation);
    SourceOutcome& out = outcomes[i];
    if (all.empty()) return;
    if (balanced) {
      Rng rng(DeriveSeed(seed, "variant-pick/" + s.id));
      const std::size_t pick = static_cast<std::size_t>(rng.Uniform(all.size()));
      out.variants.push_back(std::move(all[pick]));
      out.variant_numbers.push_back(pick);
    } else {
      out.variants = std::move(all);
      out.variant_numbers.resize(out.variants.size());
      std::iota(out.variant_numbers.begin(), out.variant_numbers.end(), 0);
    }
  });

  std::vector<std::size_t> generatable;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].variants.empty()) generatable.push_back(i);
  }

  std::vector<std::size_t> chosen = generatable;
  if (options.per_class) {
    if (*options.per_class > generatable.size()) {
      throw Error("requested " + std::to_string(*options.per_class) +
                  " machine records but only " +
                  std::to_string(generatable.size()) +
                  " sources can be manipulated (shortfall " +
                  std::to_string(*options.per_class - generatable.size()) + ")");
    }
    if (balanced) {
      Rng rng(DeriveSeed(seed, "source-pick"));
      rng.Shuffle(chosen);
      chosen.resize(*options.per_class);
      std::sort(chosen.begin(), chosen.end());
    }
  }
  if (chosen.empty()) throw Error("no source sentence can be manipulated");

  // Split membership is decided per source.
  std::vector<Split> split_of(sorted.size(), Split::kTrain);
  {
    std::vector<std::size_t> order = chosen;
    Rng rng(DeriveSeed(seed, "split"));
    rng.Shuffle(order);
    const auto sizes = SplitSizes(order.size(), options.ratios);
    for (std::size_t k = 0; k < order.size(); ++k) {
      split_of[order[k]] = k < sizes[0]             ? Split::kTrain
                           : k < sizes[0] + sizes[1] ? Split::kDev
                                                     : Split::kTest;
    }
  }

  BuildResult result;
  result.generatable_sources = generatable.size();
  for (std::size_t i : chosen) {
    const Sentence& s = *sorted[i];
    const Split split = split_of[i];
    DatasetRecord human;
    human.id = s.id + ":h";
    human.source_id = s.id;
    human.text = SentenceText(s.tokens);
    human.label = Origin::kHuman;
    human.split = split;
    result.records.push_back(std::move(human));
    const SourceOutcome& out = outcomes[i];
    for (std::size_t v = 0; v < out.variants.size(); ++v) {
      DatasetRecord machine;
      machine.id = s.id + ":m" + std::to_string(out.variant_numbers[v]);
      machine.source_id = s.id;
      machine.text = SentenceText(out.variants[v].tokens);
      machine.label = Origin::kMachine;
      machine.records = out.variants[v].records;
      machine.split = split;
      result.records.push_back(std::move(machine));
    }
  }
  result.stats = PosStatistics(result.records);
  return result;
}

std::string SourceTextOf(const DatasetRecord& record) {
  if (record.records.empty()) return record.text;
  std::map<std::size_t, const ManipulationRecord*> by_index;
  std::size_t deletions = 0;
  for (const auto& r : record.records) {
    by_index[r.token_index] = &r;
    if (r.kind == ManipulationKind::kNegationDelete) ++deletions;
  }
  const std::vector<std::string> shown = SplitOnSpace(record.text);
  const std::size_t source_len = shown.size() + deletions;
  std::vector<std::string> source;
  source.reserve(source_len);
  std::size_t next = 0;
  for (std::size_t i = 0; i < source_len; ++i) {
    auto it = by_index.find(i);
    if (it != by_index.end() &&
        it->second->kind == ManipulationKind::kNegationDelete) {
      source.push_back(it->second->original);
      continue;
    }
    if (next >= shown.size()) throw Error("records do not fit text of " + record.id);
    const std::string& token = shown[next++];
    if (it != by_index.end()) {
      if (token != it->second->substitute) {
        throw Error("records do not fit text of " + record.id);
      }
      source.push_back(it->second->original);
    } else {
      source.push_back(token);
    }
  }
  std::string out;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (i) out.push_back(' ');
    out += source[i];
  }
  return out;
}

}  // namespace manipgen
