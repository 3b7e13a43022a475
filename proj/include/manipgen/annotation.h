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

// Two-stage human annotation study.
//
// Stage 1 shows single sentences (human and machine, shuffled) to be labeled
// "human" or "machine". Stage 2 shows each machine sentence next to its
// source to be labeled "true" or "fake". Either stage accepts "skip".

#ifndef MANIPGEN_ANNOTATION_H_
#define MANIPGEN_ANNOTATION_H_

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "manipgen/datagen.h"
#include "manipgen/errors.h"

namespace manipgen {

inline constexpr std::string_view kSkipValue = "skip";
inline constexpr std::string_view kMixedPos = "MIXED";

struct AnnotationTask {
  std::string task_id;
  int stage = 1;
  std::string shown_text;
  std::optional<std::string> pair_original;        // stage 2 only
  std::optional<std::string> pos_of_manipulation;  // machine samples only
  Origin gold_origin = Origin::kHuman;             // never served
  std::string record_id;

  bool operator==(const AnnotationTask&) const = default;
};

// Full task including gold fields, for the study's task file.
nlohmann::ordered_json TaskToJson(const AnnotationTask& task);
AnnotationTask TaskFromJson(const nlohmann::json& obj);
// What an annotator may see: no gold origin, no POS.
nlohmann::ordered_json TaskPayload(const AnnotationTask& task);

void WriteTasksJsonl(const std::vector<AnnotationTask>& tasks,
                     const std::string& path);
std::vector<AnnotationTask> ReadTasksJsonl(const std::string& path);

struct StudyPlan {
  std::vector<AnnotationTask> stage1;
  std::vector<AnnotationTask> stage2;

  std::vector<AnnotationTask> AllTasks() const;
};

// Samples n_human human and n_machine machine records (optionally restricted
// to one split). Human samples avoid sources already used by machine samples
// when possible. Stage-1 order is a seeded shuffle of the merged set; stage 2
// pairs every machine sample with its source text.
StudyPlan SampleStudy(const std::vector<DatasetRecord>& dataset,
                      std::size_t n_human, std::size_t n_machine,
                      uint64_t seed, std::optional<Split> split = std::nullopt);

struct AnnotationLabel {
  std::string task_id;
  std::string annotator_id;
  int stage = 1;
  std::string value;
  std::string timestamp;

  bool operator==(const AnnotationLabel&) const = default;
};

bool IsValidLabelValue(int stage, std::string_view value);

class UnknownTaskError : public Error {
 public:
  using Error::Error;
};

class LabelDomainError : public Error {
 public:
  using Error::Error;
};

// Kappa for two aligned label lists with per-annotator marginals. Throws
// Error on length mismatch, empty input or when chance agreement is 1 and
// the lists differ.
double CohenKappa(const std::vector<std::string>& a,
                  const std::vector<std::string>& b);

double ObservedAgreement(const std::vector<std::string>& a,
                         const std::vector<std::string>& b);

struct StageAgreement {
  // "ok", "insufficient_data" or "degenerate".
  std::string status = "insufficient_data";
  std::optional<double> kappa;
  std::optional<double> observed_agreement;
  std::size_t items = 0;         // tasks both annotators labeled
  std::size_t skipped = 0;       // of those, dropped because of a skip
  std::map<std::string, std::map<std::string, std::size_t>> confusion;
};

struct AgreementReport {
  std::string annotator_a;
  std::string annotator_b;
  StageAgreement stage1;
  StageAgreement stage2;

  bool sufficient() const {
    return stage1.status == "ok" || stage2.status == "ok";
  }
  nlohmann::ordered_json ToJson() const;
};

AgreementReport ComputeAgreement(const std::vector<AnnotationLabel>& labels,
                                 const std::string& annotator_a,
                                 const std::string& annotator_b);

struct VeracityObservation {
  std::string value;  // "true" or "fake"
  std::optional<std::string> pos;
};

struct VeracityRow {
  std::size_t tasks = 0;
  std::size_t fake = 0;
  double rate = 0.0;
};

struct VeracityStats {
  std::map<std::string, VeracityRow> per_pos;

  nlohmann::ordered_json ToJson() const;
};

// Fraction labeled fake per POS. Throws Error for an observation without POS
// or with a value other than true/fake.
VeracityStats VeracityChangeRate(const std::vector<VeracityObservation>& labels);

struct LabelAck {
  bool replaced = false;
  std::optional<std::string> previous_value;
};

struct AuditEntry {
  AnnotationLabel label;
  std::string previous_value;
};

// Tasks plus the current label of every (task, annotator). Labels are
// appended to a JSONL log; reopening the log resumes the study. Safe for
// concurrent use.
class AnnotationStore {
 public:
  // An empty log_path keeps labels in memory only.
  AnnotationStore(std::vector<AnnotationTask> tasks, std::string log_path);

  // Throws UnknownTaskError or LabelDomainError.
  LabelAck Record(const AnnotationLabel& label);

  // First task of `stage` this annotator has not labeled yet.
  std::optional<AnnotationTask> NextTask(const std::string& annotator,
                                         int stage) const;

  std::optional<AnnotationTask> FindTask(const std::string& task_id) const;

  std::vector<AnnotationLabel> Labels() const;
  std::vector<AuditEntry> Audit() const;
  std::vector<std::string> Annotators() const;

  // Explicit pair for agreement; otherwise the two smallest annotator ids.
  void SetAgreementPair(std::string a, std::string b);
  std::optional<std::pair<std::string, std::string>> AgreementPair() const;

  nlohmann::ordered_json Progress() const;
  AgreementReport Agreement() const;
  VeracityStats Veracity() const;

 private:
  void Apply(const AnnotationLabel& label, LabelAck* ack);

  mutable std::shared_mutex mu_;
  std::vector<AnnotationTask> tasks_;
  std::map<std::string, std::size_t> task_index_;
  // (task_id, annotator) -> position in labels_
  std::map<std::pair<std::string, std::string>, std::size_t> current_;
  std::vector<AnnotationLabel> labels_;
  std::vector<AuditEntry> audit_;
  std::optional<std::pair<std::string, std::string>> pair_;
  std::string log_path_;
  std::ofstream log_;
};

// Label log lines written by AnnotationStore; used to compute agreement
// offline from one or more logs.
std::vector<AnnotationLabel> ReadLabelLog(const std::string& path);

// Latest label per (task, annotator, stage) in log order.
std::vector<AnnotationLabel> LatestLabels(
    const std::vector<AnnotationLabel>& log);

VeracityStats VeracityFromLabels(const std::vector<AnnotationTask>& tasks,
                                 const std::vector<AnnotationLabel>& labels);

}  // namespace manipgen

#endif  // MANIPGEN_ANNOTATION_H_
