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

#include "manipgen/annotation.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <set>
#include <tuple>

#include "manipgen/rng.h"

namespace manipgen {
namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

std::string TaskId(int stage, std::size_t position) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%d-%04zu", stage, position + 1);
  return buf;
}

std::optional<std::string> PosOf(const DatasetRecord& record) {
  if (record.records.empty()) return std::nullopt;
  std::set<std::string> tags;
  for (const auto& r : record.records) tags.insert(r.pos);
  if (tags.size() == 1) return *tags.begin();
  return std::string(kMixedPos);
}

std::string GetString(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw Error(std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

std::optional<std::string> GetOptionalString(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

int GetStage(const Json& obj) {
  auto it = obj.find("stage");
  if (it == obj.end() || !it->is_number_integer()) {
    throw Error("missing integer field 'stage'");
  }
  const int stage = it->get<int>();
  if (stage != 1 && stage != 2) throw Error("stage must be 1 or 2");
  return stage;
}

OrderedJson LabelToJson(const AnnotationLabel& label,
                        const std::optional<std::string>& replaced) {
  OrderedJson obj;
  obj["task_id"] = label.task_id;
  obj["annotator_id"] = label.annotator_id;
  obj["stage"] = label.stage;
  obj["value"] = label.value;
  obj["timestamp"] = label.timestamp;
  obj["replaced"] = replaced ? OrderedJson(*replaced) : OrderedJson(nullptr);
  return obj;
}

StageAgreement StageReport(const std::vector<AnnotationLabel>& labels, int stage,
                           const std::string& a, const std::string& b) {
  std::map<std::string, std::string> by_a, by_b;
  for (const auto& l : labels) {
    if (l.stage != stage) continue;
    if (l.annotator_id == a) by_a[l.task_id] = l.value;
    if (l.annotator_id == b) by_b[l.task_id] = l.value;
  }
  StageAgreement out;
  std::vector<std::string> va, vb;
  for (const auto& [task, value_a] : by_a) {
    auto it = by_b.find(task);
    if (it == by_b.end()) continue;
    ++out.items;
    if (value_a == kSkipValue || it->second == kSkipValue) {
      ++out.skipped;
      continue;
    }
    va.push_back(value_a);
    vb.push_back(it->second);
    ++out.confusion[value_a][it->second];
  }
  if (va.empty()) return out;
  out.observed_agreement = ObservedAgreement(va, vb);
  try {
    out.kappa = CohenKappa(va, vb);
    out.status = "ok";
  } catch (const Error&) {
    out.status = "degenerate";
  }
  return out;
}

OrderedJson StageToJson(const StageAgreement& s) {
  OrderedJson obj;
  obj["status"] = s.status;
  obj["kappa"] = s.kappa ? OrderedJson(*s.kappa) : OrderedJson(nullptr);
  obj["observed_agreement"] =
      s.observed_agreement ? OrderedJson(*s.observed_agreement) : OrderedJson(nullptr);
  obj["items"] = s.items;
  obj["skipped"] = s.skipped;
  obj["confusion"] = s.confusion;
  return obj;
}

AnnotationLabel LabelFromJson(const Json& obj) {
  AnnotationLabel l;
  l.task_id = GetString(obj, "task_id");
  l.annotator_id = GetString(obj, "annotator_id");
  l.stage = GetStage(obj);
  l.value = GetString(obj, "value");
  l.timestamp = GetOptionalString(obj, "timestamp").value_or("");
  return l;
}

}  // namespace

OrderedJson TaskToJson(const AnnotationTask& task) {
  OrderedJson obj;
  obj["task_id"] = task.task_id;
  obj["stage"] = task.stage;
  obj["shown_text"] = task.shown_text;
  obj["pair_original"] =
      task.pair_original ? OrderedJson(*task.pair_original) : OrderedJson(nullptr);
  obj["pos_of_manipulation"] = task.pos_of_manipulation
                                   ? OrderedJson(*task.pos_of_manipulation)
                                   : OrderedJson(nullptr);
  obj["gold_origin"] = OriginName(task.gold_origin);
  obj["record_id"] = task.record_id;
  return obj;
}

AnnotationTask TaskFromJson(const Json& obj) {
  if (!obj.is_object()) throw Error("task must be a JSON object");
  AnnotationTask t;
  t.task_id = GetString(obj, "task_id");
  t.stage = GetStage(obj);
  t.shown_text = GetString(obj, "shown_text");
  t.pair_original = GetOptionalString(obj, "pair_original");
  t.pos_of_manipulation = GetOptionalString(obj, "pos_of_manipulation");
  t.gold_origin = ParseOrigin(GetString(obj, "gold_origin"));
  t.record_id = GetOptionalString(obj, "record_id").value_or("");
  if (t.stage == 2 && (!t.pair_original || t.gold_origin != Origin::kMachine)) {
    throw Error("stage-2 task needs pair_original and a machine origin");
  }
  return t;
}

OrderedJson TaskPayload(const AnnotationTask& task) {
  OrderedJson obj;
  obj["task_id"] = task.task_id;
  obj["stage"] = task.stage;
  obj["shown_text"] = task.shown_text;
  if (task.stage == 2 && task.pair_original) {
    obj["pair_original"] = *task.pair_original;
  }
  return obj;
}

void WriteTasksJsonl(const std::vector<AnnotationTask>& tasks,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  for (const auto& t : tasks) out << TaskToJson(t).dump() << '\n';
  if (!out) throw Error("write failed: " + path);
}

std::vector<AnnotationTask> ReadTasksJsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open tasks file: " + path);
  std::vector<AnnotationTask> tasks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      tasks.push_back(TaskFromJson(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return tasks;
}

std::vector<AnnotationTask> StudyPlan::AllTasks() const {
  std::vector<AnnotationTask> all = stage1;
  all.insert(all.end(), stage2.begin(), stage2.end());
  return all;
}

StudyPlan SampleStudy(const std::vector<DatasetRecord>& dataset,
                      std::size_t n_human, std::size_t n_machine,
                      uint64_t seed, std::optional<Split> split) {
  std::vector<const DatasetRecord*> humans, machines;
  std::map<std::string, const DatasetRecord*> human_by_source;
  for (const auto& r : dataset) {
    if (r.label == Origin::kHuman) human_by_source.emplace(r.source_id, &r);
    if (split && r.split != *split) continue;
    (r.label == Origin::kHuman ? humans : machines).push_back(&r);
  }
  if (humans.size() < n_human || machines.size() < n_machine) {
    throw Error("study needs " + std::to_string(n_human) + " human and " +
                std::to_string(n_machine) + " machine records; dataset has " +
                std::to_string(humans.size()) + " and " +
                std::to_string(machines.size()));
  }

  Rng machine_rng(DeriveSeed(seed, "study-machine"));
  machine_rng.Shuffle(machines);
  machines.resize(n_machine);

  std::set<std::string> used_sources;
  for (const auto* m : machines) used_sources.insert(m->source_id);
  Rng human_rng(DeriveSeed(seed, "study-human"));
  human_rng.Shuffle(humans);
  std::stable_partition(humans.begin(), humans.end(), [&](const DatasetRecord* h) {
    return !used_sources.count(h->source_id);
  });
  humans.resize(n_human);

  std::vector<const DatasetRecord*> merged = humans;
  merged.insert(merged.end(), machines.begin(), machines.end());
  Rng order_rng(DeriveSeed(seed, "stage1-order"));
  order_rng.Shuffle(merged);

  StudyPlan plan;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    const DatasetRecord& r = *merged[i];
    AnnotationTask t;
    t.task_id = TaskId(1, i);
    t.stage = 1;
    t.shown_text = r.text;
    t.pos_of_manipulation = PosOf(r);
    t.gold_origin = r.label;
    t.record_id = r.id;
    plan.stage1.push_back(std::move(t));
  }

  std::vector<const DatasetRecord*> pairs = machines;
  Rng pair_rng(DeriveSeed(seed, "stage2-order"));
  pair_rng.Shuffle(pairs);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const DatasetRecord& r = *pairs[i];
    AnnotationTask t;
    t.task_id = TaskId(2, i);
    t.stage = 2;
    t.shown_text = r.text;
    auto src = human_by_source.find(r.source_id);
    t.pair_original = src != human_by_source.end() ? src->second->text
                                                   : SourceTextOf(r);
    t.pos_of_manipulation = PosOf(r);
    t.gold_origin = Origin::kMachine;
    t.record_id = r.id;
    plan.stage2.push_back(std::move(t));
  }
  return plan;
}

bool IsValidLabelValue(int stage, std::string_view value) {
  if (value == kSkipValue) return stage == 1 || stage == 2;
  if (stage == 1) return value == "human" || value == "machine";
  if (stage == 2) return value == "true" || value == "fake";
  return false;
}

double ObservedAgreement(const std::vector<std::string>& a,
                         const std::vector<std::string>& b) {
  if (a.size() != b.size()) throw Error("label lists differ in length");
  if (a.empty()) throw Error("no labels to compare");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

double CohenKappa(const std::vector<std::string>& a,
                  const std::vector<std::string>& b) {
  const double p_o = ObservedAgreement(a, b);
  std::map<std::string, std::size_t> count_a, count_b;
  for (const auto& v : a) ++count_a[v];
  for (const auto& v : b) ++count_b[v];
  const double n = static_cast<double>(a.size());
  double p_e = 0.0;
  for (const auto& [label, ca] : count_a) {
    auto it = count_b.find(label);
    if (it != count_b.end()) {
      p_e += (static_cast<double>(ca) / n) * (static_cast<double>(it->second) / n);
    }
  }
  // p_e reaches 1 only when both annotators used one and the same label.
  if (count_a.size() == 1 && count_b.size() == 1 &&
      count_a.begin()->first == count_b.begin()->first) {
    if (a == b) return 1.0;
    throw Error("kappa undefined: degenerate marginals");
  }
  return (p_o - p_e) / (1.0 - p_e);
}

AgreementReport ComputeAgreement(const std::vector<AnnotationLabel>& labels,
                                 const std::string& annotator_a,
                                 const std::string& annotator_b) {
  AgreementReport report;
  report.annotator_a = annotator_a;
  report.annotator_b = annotator_b;
  report.stage1 = StageReport(labels, 1, annotator_a, annotator_b);
  report.stage2 = StageReport(labels, 2, annotator_a, annotator_b);
  return report;
}

OrderedJson AgreementReport::ToJson() const {
  OrderedJson obj;
  obj["status"] = sufficient() ? "ok" : "insufficient_data";
  obj["annotators"] = {annotator_a, annotator_b};
  obj["stage1"] = StageToJson(stage1);
  obj["stage2"] = StageToJson(stage2);
  return obj;
}

VeracityStats VeracityChangeRate(const std::vector<VeracityObservation>& labels) {
  VeracityStats stats;
  for (const auto& obs : labels) {
    if (!obs.pos) throw Error("stage-2 label is not joined to a POS");
    if (obs.value != "true" && obs.value != "fake") {
      throw Error("veracity label must be true or fake, got '" + obs.value + "'");
    }
    VeracityRow& row = stats.per_pos[*obs.pos];
    ++row.tasks;
    row.fake += obs.value == "fake";
  }
  for (auto& [pos, row] : stats.per_pos) {
    row.rate = static_cast<double>(row.fake) / static_cast<double>(row.tasks);
  }
  return stats;
}

OrderedJson VeracityStats::ToJson() const {
  OrderedJson rows = OrderedJson::object();
  for (const auto& [pos, row] : per_pos) {
    rows[pos] = {{"tasks", row.tasks}, {"fake", row.fake}, {"rate", row.rate}};
  }
  return {{"per_pos", rows}};
}

VeracityStats VeracityFromLabels(const std::vector<AnnotationTask>& tasks,
                                 const std::vector<AnnotationLabel>& labels) {
  std::map<std::string, const AnnotationTask*> by_id;
  for (const auto& t : tasks) by_id[t.task_id] = &t;
  std::vector<VeracityObservation> obs;
  for (const auto& l : labels) {
    if (l.stage != 2 || l.value == kSkipValue) continue;
    auto it = by_id.find(l.task_id);
    VeracityObservation o{l.value, std::nullopt};
    if (it != by_id.end()) o.pos = it->second->pos_of_manipulation;
    obs.push_back(std::move(o));
  }
  return VeracityChangeRate(obs);
}

std::vector<AnnotationLabel> ReadLabelLog(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open label log: " + path);
  std::vector<AnnotationLabel> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      labels.push_back(LabelFromJson(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return labels;
}

std::vector<AnnotationLabel> LatestLabels(const std::vector<AnnotationLabel>& log) {
  std::map<std::tuple<std::string, std::string, int>, std::size_t> latest;
  std::vector<AnnotationLabel> out;
  for (const auto& l : log) {
    const auto key = std::make_tuple(l.task_id, l.annotator_id, l.stage);
    auto it = latest.find(key);
    if (it == latest.end()) {
      latest.emplace(key, out.size());
      out.push_back(l);
    } else {
      out[it->second] = l;
    }
  }
  return out;
}

AnnotationStore::AnnotationStore(std::vector<AnnotationTask> tasks,
                                 std::string log_path)
    : tasks_(std::move(tasks)), log_path_(std::move(log_path)) {
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    if (!task_index_.emplace(tasks_[i].task_id, i).second) {
      throw Error("duplicate task id " + tasks_[i].task_id);
    }
  }
  if (log_path_.empty()) return;
  if (std::filesystem::exists(log_path_)) {
    for (const auto& label : ReadLabelLog(log_path_)) Apply(label, nullptr);
  }
  log_.open(log_path_, std::ios::binary | std::ios::app);
  if (!log_) throw Error("cannot open label log for append: " + log_path_);
}

void AnnotationStore::Apply(const AnnotationLabel& label, LabelAck* ack) {
  auto task = task_index_.find(label.task_id);
  if (task == task_index_.end()) {
    throw UnknownTaskError("unknown task '" + label.task_id + "'");
  }
  if (tasks_[task->second].stage != label.stage) {
    throw LabelDomainError("task " + label.task_id + " belongs to stage " +
                           std::to_string(tasks_[task->second].stage));
  }
  if (label.annotator_id.empty()) throw LabelDomainError("empty annotator_id");
  if (!IsValidLabelValue(label.stage, label.value)) {
    throw LabelDomainError("value '" + label.value + "' not allowed in stage " +
                           std::to_string(label.stage));
  }
  const auto key = std::make_pair(label.task_id, label.annotator_id);
  auto it = current_.find(key);
  if (it == current_.end()) {
    current_.emplace(key, labels_.size());
    labels_.push_back(label);
    if (ack) *ack = LabelAck{};
  } else {
    AnnotationLabel& existing = labels_[it->second];
    audit_.push_back(AuditEntry{label, existing.value});
    if (ack) *ack = LabelAck{true, existing.value};
    existing = label;
  }
}

LabelAck AnnotationStore::Record(const AnnotationLabel& label) {
  std::unique_lock lock(mu_);
  LabelAck ack;
  Apply(label, &ack);
  if (log_.is_open()) {
    log_ << LabelToJson(label, ack.previous_value).dump() << '\n';
    log_.flush();
    if (!log_) throw Error("label log write failed: " + log_path_);
  }
  return ack;
}

std::optional<AnnotationTask> AnnotationStore::NextTask(
    const std::string& annotator, int stage) const {
  std::shared_lock lock(mu_);
  for (const auto& t : tasks_) {
    if (t.stage != stage) continue;
    if (!current_.count({t.task_id, annotator})) return t;
  }
  return std::nullopt;
}

std::optional<AnnotationTask> AnnotationStore::FindTask(
    const std::string& task_id) const {
  std::shared_lock lock(mu_);
  auto it = task_index_.find(task_id);
  if (it == task_index_.end()) return std::nullopt;
  return tasks_[it->second];
}

std::vector<AnnotationLabel> AnnotationStore::Labels() const {
  std::shared_lock lock(mu_);
  return labels_;
}

std::vector<AuditEntry> AnnotationStore::Audit() const {
  std::shared_lock lock(mu_);
  return audit_;
}

std::vector<std::string> AnnotationStore::Annotators() const {
  std::shared_lock lock(mu_);
  std::set<std::string> ids;
  for (const auto& l : labels_) ids.insert(l.annotator_id);
  return {ids.begin(), ids.end()};
}

void AnnotationStore::SetAgreementPair(std::string a, std::string b) {
  std::unique_lock lock(mu_);
  pair_ = std::make_pair(std::move(a), std::move(b));
}

std::optional<std::pair<std::string, std::string>>
AnnotationStore::AgreementPair() const {
  {
    std::shared_lock lock(mu_);
    if (pair_) return pair_;
  }
  const auto ids = Annotators();
  if (ids.size() < 2) return std::nullopt;
  return std::make_pair(ids[0], ids[1]);
}

OrderedJson AnnotationStore::Progress() const {
  std::shared_lock lock(mu_);
  std::map<int, std::size_t> totals;
  for (const auto& t : tasks_) ++totals[t.stage];
  std::map<int, std::map<std::string, std::pair<std::size_t, std::size_t>>> done;
  for (const auto& l : labels_) {
    auto& cell = done[l.stage][l.annotator_id];
    ++cell.first;
    cell.second += l.value == kSkipValue;
  }
  OrderedJson stages = OrderedJson::object();
  for (int stage : {1, 2}) {
    OrderedJson annotators = OrderedJson::object();
    for (const auto& [id, counts] : done[stage]) {
      annotators[id] = {{"done", counts.first},
                        {"skipped", counts.second},
                        {"remaining", totals[stage] - counts.first}};
    }
    stages[std::to_string(stage)] = {{"total", totals[stage]},
                                     {"annotators", annotators}};
  }
  return {{"stages", stages}};
}

AgreementReport AnnotationStore::Agreement() const {
  const auto pair = AgreementPair();
  if (!pair) return AgreementReport{};
  return ComputeAgreement(Labels(), pair->first, pair->second);
}

VeracityStats AnnotationStore::Veracity() const {
  std::shared_lock lock(mu_);
  return VeracityFromLabels(tasks_, labels_);
}

}  // namespace manipgen
