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

// Labeled human/machine datasets built from a tagged corpus.

#ifndef MANIPGEN_DATAGEN_H_
#define MANIPGEN_DATAGEN_H_

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "manipgen/corpus.h"
#include "manipgen/embeddings.h"
#include "manipgen/manipulate.h"

namespace manipgen {

enum class Origin { kHuman, kMachine };
enum class Split { kTrain, kDev, kTest };

std::string_view OriginName(Origin origin);
Origin ParseOrigin(std::string_view name);
std::string_view SplitName(Split split);
Split ParseSplit(std::string_view name);

struct DatasetRecord {
  std::string id;
  std::string source_id;
  std::string text;
  Origin label = Origin::kHuman;
  std::vector<ManipulationRecord> records;  // empty for human records
  Split split = Split::kTrain;

  bool operator==(const DatasetRecord&) const = default;
};

nlohmann::ordered_json RecordToJson(const DatasetRecord& record);
// Throws Error on schema violations.
DatasetRecord RecordFromJson(const nlohmann::json& obj);

void WriteJsonl(const std::vector<DatasetRecord>& records, std::ostream& out);
void WriteJsonlFile(const std::vector<DatasetRecord>& records,
                    const std::string& path);
// Throws ParseError naming the offending line.
std::vector<DatasetRecord> ReadJsonl(std::istream& in);
std::vector<DatasetRecord> ReadJsonlFile(const std::string& path);

struct SummaryStats {
  std::size_t count = 0;
  double average = 0.0;
  double median = 0.0;
};

struct PosStats {
  std::size_t manipulations = 0;
  // Excluded-neighbor statistics; absent for NEG_PART, where no neighbor
  // list is consulted.
  std::optional<SummaryStats> excluded;
};

struct DatasetStats {
  std::map<std::string, PosStats> per_pos;
  std::map<std::string, std::size_t> per_label;
  std::map<std::string, std::size_t> per_split;
  // label -> split -> count
  std::map<std::string, std::map<std::string, std::size_t>> per_label_split;

  nlohmann::ordered_json ToJson() const;
};

// Count, mean and median (mean of the middle pair for even counts).
SummaryStats Summarize(std::vector<double> values);

// Per-POS manipulation counts and excluded-candidate statistics over machine
// records. An embedding swap contributes its rank (neighbors skipped); a
// number randomization contributes 0.
DatasetStats PosStatistics(const std::vector<DatasetRecord>& records);

enum class BuildMode {
  // per_class sources, each giving its human sentence and one variant.
  kBalanced,
  // Every human sentence with at least one variant, plus all its variants.
  kExhaustive,
};

struct BuildOptions {
  ManipulationConfig manipulation;
  // Required in balanced mode; nullopt means "every generatable source".
  std::optional<std::size_t> per_class;
  SplitRatios ratios;
  BuildMode mode = BuildMode::kBalanced;
  std::size_t workers = 1;
};

struct BuildResult {
  std::vector<DatasetRecord> records;
  DatasetStats stats;
  std::size_t generatable_sources = 0;
};

// Records are ordered by source id, human first, then variant index. Splits
// are assigned per source. Output is identical for any worker count. Throws
// Error when fewer than per_class sources can be manipulated.
BuildResult BuildDataset(const std::vector<Sentence>& sentences,
                         const NeighborSource& index,
                         const BuildOptions& options);

// Reconstructs the source sentence text of a machine record by undoing its
// records on the whitespace-split text.
std::string SourceTextOf(const DatasetRecord& record);

}  // namespace manipgen

#endif  // MANIPGEN_DATAGEN_H_
