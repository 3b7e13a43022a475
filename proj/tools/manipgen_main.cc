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

// manipgen command-line entry point.
//
// Every subcommand writes its outputs, config.json (the resolved settings)
// and manifest.json (SHA-256 of every input) into --out. Settings come from
// flags, then the JSON file given by --config, then defaults.
//
// Exit codes: 0 success, 1 operational failure, 2 usage error.

#include <openssl/evp.h>
#include <signal.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "manipgen/annotation.h"
#include "manipgen/annotation_server.h"
#include "manipgen/corpus.h"
#include "manipgen/datagen.h"
#include "manipgen/detect.h"
#include "manipgen/embeddings.h"
#include "manipgen/errors.h"
#include "manipgen/manipulate.h"

namespace fs = std::filesystem;
using OrderedJson = nlohmann::ordered_json;

namespace manipgen {
namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

void Log(const std::string& message) { std::cerr << "[manipgen] " << message << '\n'; }

// Flat JSON object: keys are long flag names without the leading dashes.
// Items are attached to the subcommand being run.
class JsonConfig : public CLI::Config {
 public:
  std::string command;

  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    return {};
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : obj.items()) {
      CLI::ConfigItem item;
      if (!command.empty()) item.parents = {command};
      item.name = key;
      if (value.is_null()) continue;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(Scalar(v));
      } else {
        item.inputs.push_back(Scalar(value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  static std::string Scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("config values must be scalars or arrays of scalars");
  }
};

// Relative inputs missing from the working directory are looked up under
// $MANIPGEN_DATA_DIR.
std::string ResolveInput(const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute() || fs::exists(path)) return path;
  if (const char* dir = std::getenv("MANIPGEN_DATA_DIR"); dir && *dir) {
    fs::path candidate = fs::path(dir) / path;
    if (fs::exists(candidate)) return candidate.string();
  }
  return path;
}

std::string Sha256File(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                             &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 unavailable");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) {
      EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xF];
  }
  return hex;
}

// Output directory plus the bookkeeping every run leaves in it.
class RunDir {
 public:
  explicit RunDir(const std::string& out) : out_(out) {
    std::error_code ec;
    fs::create_directories(out_, ec);
    if (ec) throw Error("cannot create output directory " + out + ": " + ec.message());
  }

  std::string Path(const std::string& name) const { return (out_ / name).string(); }

  // Records a checksum for each input; call before reading it.
  std::string Input(const std::string& role, const std::string& path) {
    const std::string resolved = ResolveInput(path);
    if (!fs::is_regular_file(resolved)) throw Error(role + " not found: " + path);
    inputs_.push_back({{"role", role},
                       {"path", resolved},
                       {"bytes", fs::file_size(resolved)},
                       {"sha256", Sha256File(resolved)}});
    return resolved;
  }

  void Finish(const std::string& command, const OrderedJson& config) const {
    OrderedJson echo{{"command", command}};
    for (const auto& [key, value] : config.items()) echo[key] = value;
    WriteJson("config.json", echo);
    WriteJson("manifest.json", OrderedJson{{"command", command}, {"inputs", inputs_}});
  }

  void WriteJson(const std::string& name, const OrderedJson& value) const {
    std::ofstream out(Path(name), std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + Path(name));
    out << value.dump(2) << '\n';
    if (!out) throw Error("write failed: " + Path(name));
  }

 private:
  fs::path out_;
  OrderedJson inputs_ = OrderedJson::array();
};

CLI::App* AddCommand(CLI::App& app, const std::string& name, const std::string& help) {
  return app.add_subcommand(name, help);
}

// Training or evaluation data: claims TSV, generated dataset JSONL (labels
// human/machine, filtered by split) or labeled {text,label} JSONL.
std::vector<LabeledText> LoadLabeled(const std::string& path,
                                     const std::optional<Split>& split) {
  if (fs::path(path).extension() == ".tsv") {
    std::vector<LabeledText> out;
    for (auto& c : LoadClaims(path)) out.push_back({std::move(c.text), std::move(c.label)});
    return out;
  }
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw Error("cannot open " + path);
  std::string first;
  while (std::getline(probe, first) && first.find_first_not_of(" \t\r") == std::string::npos) {
  }
  bool is_dataset = false;
  try {
    is_dataset = !first.empty() && nlohmann::json::parse(first).contains("source_id");
  } catch (const nlohmann::json::exception&) {
    throw ParseError(1, "not JSON: " + path);
  }
  if (!is_dataset) return ReadLabeledJsonl(path);
  std::vector<LabeledText> out;
  for (const auto& r : ReadJsonlFile(path)) {
    if (split && r.split != *split) continue;
    out.push_back({r.text, std::string(OriginName(r.label))});
  }
  return out;
}

std::optional<Split> OptionalSplit(const std::string& name) {
  if (name.empty() || name == "all") return std::nullopt;
  return ParseSplit(name);
}

OrderedJson RatiosJson(const SplitRatios& r) {
  return {{"train", r.train}, {"dev", r.dev}, {"test", r.test}};
}

// ---- generate ---------------------------------------------------------------

struct GenerateArgs {
  std::string corpus, vectors, out;
  std::string mode = "balanced";
  std::optional<std::size_t> per_class;
  std::string ratios = "0.8,0.1,0.1";
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  ManipulationConfig manipulation;
  std::vector<std::string> target_pos{manipulation.target_pos.begin(),
                                      manipulation.target_pos.end()};
};

void AddGenerate(CLI::App& app, GenerateArgs& a) {
  CLI::App* sub = AddCommand(app, "generate", "Build a human/machine dataset");
  sub->add_option("--corpus", a.corpus, "POS-tagged corpus (TSV)")->required();
  sub->add_option("--vectors", a.vectors, "Word vectors (vec text format)")->required();
  sub->add_option("--out", a.out, "Output directory")->required();
  sub->add_option("--seed", a.manipulation.seed, "Top-level seed")->capture_default_str();
  sub->add_option("--mode", a.mode, "balanced or exhaustive")
      ->check(CLI::IsMember({"balanced", "exhaustive"}))
      ->capture_default_str();
  sub->add_option("--per-class", a.per_class,
                  "Sentences per class in balanced mode (default: all generatable)");
  sub->add_option("--ratios", a.ratios, "train,dev,test ratios")->capture_default_str();
  sub->add_option("--workers", a.workers, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--target-pos", a.target_pos, "POS tags to manipulate")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--ratio-threshold", a.manipulation.ratio_threshold,
                  "Reject neighbors whose character ratio exceeds this")
      ->capture_default_str();
  sub->add_option("--candidates", a.manipulation.candidates_per_token,
                  "Substitutes kept per token")
      ->capture_default_str();
  sub->add_option("--number-variants", a.manipulation.number_variants,
                  "Random replacements per number")
      ->capture_default_str();
  sub->add_option("--max-variants", a.manipulation.max_variants_per_sentence,
                  "Variant cap per sentence")
      ->capture_default_str();
  sub->add_option("--scan-limit", a.manipulation.neighbor_scan_limit,
                  "Neighbors inspected per token")
      ->capture_default_str();
}

int RunGenerate(GenerateArgs& a) {
  RunDir run(a.out);
  a.manipulation.target_pos = {a.target_pos.begin(), a.target_pos.end()};
  BuildOptions options;
  options.manipulation = a.manipulation;
  options.per_class = a.per_class;
  options.ratios = ParseRatios(a.ratios);
  options.mode = a.mode == "balanced" ? BuildMode::kBalanced : BuildMode::kExhaustive;
  options.workers = a.workers;
  options.manipulation.Validate();

  const auto sentences = ReadPosCorpusFile(run.Input("corpus", a.corpus));
  Log("read " + std::to_string(sentences.size()) + " sentences");
  std::vector<std::string> warnings;
  const EmbeddingIndex index = EmbeddingIndex::Load(run.Input("vectors", a.vectors), &warnings);
  for (const auto& w : warnings) Log("warning: " + w);
  Log("loaded " + std::to_string(index.size()) + " vectors of dim " +
      std::to_string(index.dim()));

  const BuildResult result = BuildDataset(sentences, index, options);
  WriteJsonlFile(result.records, run.Path("dataset.jsonl"));
  OrderedJson stats = result.stats.ToJson();
  stats["generatable_sources"] = result.generatable_sources;
  run.WriteJson("stats.json", stats);
  Log("wrote " + std::to_string(result.records.size()) + " records (" +
      std::to_string(result.generatable_sources) + " generatable sources)");

  const ManipulationConfig& m = options.manipulation;
  run.Finish("generate",
             {{"corpus", a.corpus},
              {"vectors", a.vectors},
              {"out", a.out},
              {"seed", m.seed},
              {"mode", a.mode},
              {"per_class", a.per_class ? OrderedJson(*a.per_class) : OrderedJson(nullptr)},
              {"ratios", RatiosJson(options.ratios)},
              {"workers", a.workers},
              {"target_pos", m.target_pos},
              {"ratio_threshold", m.ratio_threshold},
              {"candidates", m.candidates_per_token},
              {"number_variants", m.number_variants},
              {"max_variants", m.max_variants_per_sentence},
              {"scan_limit", m.neighbor_scan_limit}});
  return 0;
}

// ---- stats ------------------------------------------------------------------

struct StatsArgs {
  std::string dataset, out;
};

void AddStats(CLI::App& app, StatsArgs& a) {
  CLI::App* sub = AddCommand(app, "stats", "Per-POS statistics of a dataset");
  sub->add_option("--dataset", a.dataset, "Dataset JSONL")->required();
  sub->add_option("--out", a.out, "Output directory")->required();
}

int RunStats(const StatsArgs& a) {
  RunDir run(a.out);
  const auto records = ReadJsonlFile(run.Input("dataset", a.dataset));
  const OrderedJson stats = PosStatistics(records).ToJson();
  run.WriteJson("stats.json", stats);
  std::cout << stats.dump(2) << '\n';
  run.Finish("stats", {{"dataset", a.dataset}, {"out", a.out}});
  return 0;
}

// ---- split ------------------------------------------------------------------

struct SplitArgs {
  std::string articles, out, category_map;
  std::string ratios = "0.8,0.1,0.1";
  uint64_t seed = 0;
};

void AddSplit(CLI::App& app, SplitArgs& a) {
  CLI::App* sub =
      AddCommand(app, "split", "Normalize article categories and split articles");
  sub->add_option("--articles", a.articles, "Articles JSONL")->required();
  sub->add_option("--out", a.out, "Output directory")->required();
  sub->add_option("--category-map", a.category_map, "raw<TAB>canonical category map");
  sub->add_option("--ratios", a.ratios, "train,dev,test ratios")->capture_default_str();
  sub->add_option("--seed", a.seed, "Seed")->capture_default_str();
}

int RunSplit(const SplitArgs& a) {
  RunDir run(a.out);
  const SplitRatios ratios = ParseRatios(a.ratios);
  const CategoryMap map = a.category_map.empty()
                              ? CategoryMap()
                              : CategoryMap::Load(run.Input("category_map", a.category_map));
  auto articles = ReadArticlesJsonlFile(run.Input("articles", a.articles));
  std::map<std::string, std::size_t> per_category;
  for (auto& article : articles) {
    CategoryResult r = NormalizeCategory(article.topic, map);
    if (r.warning) Log("warning: " + *r.warning);
    article.topic = r.category;
    ++per_category[article.topic];
  }
  const Splits<Article> splits = SplitArticles(articles, ratios, a.seed);
  const auto write = [&](const std::vector<Article>& part, const std::string& name) {
    std::ofstream out(run.Path(name), std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + run.Path(name));
    WriteArticlesJsonl(part, out);
  };
  write(splits.train, "train.jsonl");
  write(splits.dev, "dev.jsonl");
  write(splits.test, "test.jsonl");
  run.WriteJson("split_stats.json", {{"train", splits.train.size()},
                                     {"dev", splits.dev.size()},
                                     {"test", splits.test.size()},
                                     {"per_category", per_category}});
  Log("split " + std::to_string(articles.size()) + " articles");
  run.Finish("split", {{"articles", a.articles},
                       {"out", a.out},
                       {"category_map", a.category_map.empty() ? OrderedJson(nullptr)
                                                               : OrderedJson(a.category_map)},
                       {"ratios", RatiosJson(ratios)},
                       {"seed", a.seed}});
  return 0;
}

// ---- sample-study -----------------------------------------------------------

struct SampleArgs {
  std::string dataset, out, split;
  std::size_t n_human = 145;
  std::size_t n_machine = 155;
  uint64_t seed = 0;
};

void AddSample(CLI::App& app, SampleArgs& a) {
  CLI::App* sub =
      AddCommand(app, "sample-study", "Sample the two-stage annotation study");
  sub->add_option("--dataset", a.dataset, "Dataset JSONL")->required();
  sub->add_option("--out", a.out, "Output directory")->required();
  sub->add_option("--n-human", a.n_human, "Human sentences in stage 1")->capture_default_str();
  sub->add_option("--n-machine", a.n_machine, "Machine sentences in stage 1")
      ->capture_default_str();
  sub->add_option("--split", a.split, "Restrict to one split (train, dev, test)");
  sub->add_option("--seed", a.seed, "Seed")->capture_default_str();
}

int RunSample(const SampleArgs& a) {
  RunDir run(a.out);
  const auto records = ReadJsonlFile(run.Input("dataset", a.dataset));
  const StudyPlan plan =
      SampleStudy(records, a.n_human, a.n_machine, a.seed, OptionalSplit(a.split));
  WriteTasksJsonl(plan.AllTasks(), run.Path("tasks.jsonl"));
  Log("sampled " + std::to_string(plan.stage1.size()) + " stage-1 and " +
      std::to_string(plan.stage2.size()) + " stage-2 tasks");
  run.Finish("sample-study", {{"dataset", a.dataset},
                              {"out", a.out},
                              {"n_human", a.n_human},
                              {"n_machine", a.n_machine},
                              {"split", a.split.empty() ? OrderedJson(nullptr) : OrderedJson(a.split)},
                              {"seed", a.seed}});
  return 0;
}

// ---- serve-annotation -------------------------------------------------------

struct ServeArgs {
  std::string tasks, out, labels_log, static_dir;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::vector<std::string> pair;
};

void AddServe(CLI::App& app, ServeArgs& a) {
  CLI::App* sub = AddCommand(app, "serve-annotation", "Serve the annotation API");
  sub->add_option("--tasks", a.tasks, "Tasks JSONL from sample-study")->required();
  sub->add_option("--out", a.out, "Output directory")->required();
  sub->add_option("--labels-log", a.labels_log,
                  "Append-only label log (default: <out>/labels.jsonl)");
  sub->add_option("--static", a.static_dir, "Directory served at /");
  sub->add_option("--host", a.host, "Bind address")->capture_default_str();
  sub->add_option("--port", a.port, "Port (0 picks a free one)")
      ->check(CLI::Range(0, 65535))
      ->capture_default_str();
  sub->add_option("--agreement-pair", a.pair, "Annotator ids used for kappa")
      ->delimiter(',')
      ->expected(2);
}

int RunServe(const ServeArgs& a) {
  RunDir run(a.out);
  const std::string log = a.labels_log.empty() ? run.Path("labels.jsonl") : a.labels_log;
  AnnotationStore store(ReadTasksJsonl(run.Input("tasks", a.tasks)), log);
  if (a.pair.size() == 2) store.SetAgreementPair(a.pair[0], a.pair[1]);
  run.Finish("serve-annotation",
             {{"tasks", a.tasks},
              {"out", a.out},
              {"labels_log", log},
              {"static", a.static_dir},
              {"host", a.host},
              {"port", a.port},
              {"agreement_pair", a.pair.empty() ? OrderedJson(nullptr) : OrderedJson(a.pair)}});

  // Block termination signals so a dedicated thread can wait for them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  AnnotationServer server(store, a.static_dir);
  const int port = server.Bind(a.host, a.port);
  std::cout << "listening on http://" << a.host << ':' << port << '\n' << std::flush;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.Stop();
  });
  server.Serve();
  if (waiter.joinable()) {
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
  }
  Log("stopped; " + std::to_string(store.Labels().size()) + " labels stored");
  return 0;
}

// ---- agreement --------------------------------------------------------------

struct AgreementArgs {
  std::vector<std::string> labels;
  std::string tasks, out;
  std::vector<std::string> annotators;
};

void AddAgreement(CLI::App& app, AgreementArgs& a) {
  CLI::App* sub = AddCommand(app, "agreement", "Cohen's kappa per stage from label logs");
  sub->add_option("--labels", a.labels, "Label log(s) (JSONL)")->required()->expected(1, -1);
  sub->add_option("--annotators", a.annotators,
                  "Annotator pair (default: two smallest ids)")
      ->delimiter(',')
      ->expected(2);
  sub->add_option("--tasks", a.tasks, "Tasks JSONL; adds veracity-change rates");
  sub->add_option("--out", a.out, "Output directory")->required();
}

int RunAgreement(const AgreementArgs& a) {
  RunDir run(a.out);
  std::vector<AnnotationLabel> log;
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    auto part = ReadLabelLog(run.Input("labels", a.labels[i]));
    log.insert(log.end(), part.begin(), part.end());
  }
  const auto labels = LatestLabels(log);
  std::set<std::string> annotators;
  for (const auto& l : labels) annotators.insert(l.annotator_id);

  OrderedJson report;
  std::vector<std::string> pair = a.annotators;
  if (pair.empty() && annotators.size() >= 2) {
    pair = {*annotators.begin(), *std::next(annotators.begin())};
  }
  if (pair.size() < 2) {
    report = {{"status", "insufficient_data"}, {"reason", "fewer than two annotators"}};
  } else {
    const AgreementReport r = ComputeAgreement(labels, pair[0], pair[1]);
    report = r.ToJson();
  }
  if (!a.tasks.empty()) {
    report["veracity"] =
        VeracityFromLabels(ReadTasksJsonl(run.Input("tasks", a.tasks)), labels).ToJson();
  }
  run.WriteJson("agreement.json", report);
  std::cout << report.dump(2) << '\n';
  run.Finish("agreement", {{"labels", a.labels},
                           {"annotators", pair.empty() ? OrderedJson(nullptr) : OrderedJson(pair)},
                           {"tasks", a.tasks.empty() ? OrderedJson(nullptr) : OrderedJson(a.tasks)},
                           {"out", a.out}});
  return 0;
}

// ---- train-baseline / evaluate ---------------------------------------------

struct TrainArgs {
  std::string train, out;
  std::string split = "train";
  TrainOptions options;
};

void AddTrain(CLI::App& app, TrainArgs& a) {
  CLI::App* sub =
      AddCommand(app, "train-baseline", "Train the char n-gram logistic baseline");
  sub->add_option("--train", a.train, "Claims TSV, dataset JSONL or labeled JSONL")
      ->required();
  sub->add_option("--out", a.out, "Output directory")->required();
  sub->add_option("--split", a.split, "Dataset split to train on (or 'all')")
      ->capture_default_str();
  sub->add_option("--epochs", a.options.epochs, "Epochs")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--learning-rate", a.options.learning_rate, "SGD step size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--seed", a.options.seed, "Seed")->capture_default_str();
  sub->add_option("--ngram-low", a.options.ngrams.low, "Smallest n")->capture_default_str();
  sub->add_option("--ngram-high", a.options.ngrams.high, "Largest n")->capture_default_str();
}

int RunTrain(const TrainArgs& a) {
  RunDir run(a.out);
  const auto data = LoadLabeled(run.Input("train", a.train), OptionalSplit(a.split));
  Log("training on " + std::to_string(data.size()) + " examples");
  const TrainResult result = TrainLinear(data, a.options);
  result.model.Save(run.Path("model.json"));
  std::vector<std::string> preds, golds;
  for (const auto& item : data) {
    preds.push_back(result.model.Predict(item.text));
    golds.push_back(item.label);
  }
  const EvalReport fit = Evaluate(
      preds, golds, {result.model.classes().begin(), result.model.classes().end()});
  run.WriteJson("train_report.json",
                {{"examples", data.size()},
                 {"loss_history", result.loss_history},
                 {"training_accuracy", fit.accuracy},
                 {"training_macro_f1", fit.macro_f1}});
  Log("final training loss " + std::to_string(result.loss_history.back()));
  run.Finish("train-baseline", {{"train", a.train},
                                {"out", a.out},
                                {"split", a.split},
                                {"epochs", a.options.epochs},
                                {"learning_rate", a.options.learning_rate},
                                {"seed", a.options.seed},
                                {"ngram_low", a.options.ngrams.low},
                                {"ngram_high", a.options.ngrams.high}});
  return 0;
}

struct EvaluateArgs {
  std::string model, data, out;
  std::string split = "test";
};

void AddEvaluate(CLI::App& app, EvaluateArgs& a) {
  CLI::App* sub = AddCommand(app, "evaluate", "Accuracy and macro F1 of a model");
  sub->add_option("--model", a.model, "model.json from train-baseline")->required();
  sub->add_option("--data", a.data, "Claims TSV, dataset JSONL or labeled JSONL")->required();
  sub->add_option("--split", a.split, "Dataset split to evaluate (or 'all')")
      ->capture_default_str();
  sub->add_option("--out", a.out, "Output directory")->required();
}

int RunEvaluate(const EvaluateArgs& a) {
  RunDir run(a.out);
  const LinearModel model = LinearModel::Load(run.Input("model", a.model));
  const auto data = LoadLabeled(run.Input("data", a.data), OptionalSplit(a.split));
  std::vector<std::string> preds, golds;
  for (const auto& item : data) {
    preds.push_back(model.Predict(item.text));
    golds.push_back(item.label);
  }
  const OrderedJson report =
      Evaluate(preds, golds, {model.classes().begin(), model.classes().end()}).ToJson();
  run.WriteJson("report.json", report);
  std::cout << report.dump(2) << '\n';
  run.Finish("evaluate",
             {{"model", a.model}, {"data", a.data}, {"split", a.split}, {"out", a.out}});
  return 0;
}

// ---- compose-training -------------------------------------------------------

struct ComposeArgs {
  std::string setting, gold, generated, out;
  std::string generated_split = "train";
  ComposeOptions options;
  std::optional<std::size_t> base_size;
};

void AddCompose(CLI::App& app, ComposeArgs& a) {
  CLI::App* sub = AddCommand(app, "compose-training",
                             "Assemble baseline, zero-shot or augment training data");
  sub->add_option("--setting", a.setting, "baseline, zero_shot or augment")
      ->required()
      ->check(CLI::IsMember({"baseline", "zero_shot", "zero-shot", "augment"}));
  sub->add_option("--gold", a.gold, "Gold claims TSV");
  sub->add_option("--generated", a.generated, "Generated dataset JSONL");
  sub->add_option("--generated-split", a.generated_split,
                  "Split of the generated data to use (or 'all')")
      ->capture_default_str();
  sub->add_option("--factor", a.options.factor, "Multiplier on the generated data")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--base-size", a.base_size,
                  "Size the factor multiplies (default: generated count)");
  sub->add_flag("--invert-mapping", a.options.invert_mapping,
                "Map machine to true and human to fake");
  sub->add_option("--seed", a.options.seed, "Seed")->capture_default_str();
  sub->add_option("--out", a.out, "Output directory")->required();
}

int RunCompose(ComposeArgs& a) {
  RunDir run(a.out);
  const TrainingSetting setting = ParseSetting(a.setting);
  a.options.base_size = a.base_size;
  std::optional<std::vector<ClaimRecord>> gold;
  if (!a.gold.empty()) gold = LoadClaims(run.Input("gold", a.gold));
  std::vector<DatasetRecord> generated;
  if (!a.generated.empty()) {
    const auto split = OptionalSplit(a.generated_split);
    for (auto& r : ReadJsonlFile(run.Input("generated", a.generated))) {
      if (!split || r.split == *split) generated.push_back(std::move(r));
    }
  }
  if (setting == TrainingSetting::kBaseline && !generated.empty()) {
    Log("warning: baseline ignores --generated");
  }
  const auto train = ComposeTraining(setting, gold, generated, a.options);
  WriteLabeledJsonl(train, run.Path("train.jsonl"));
  Log("composed " + std::to_string(train.size()) + " training examples");
  run.Finish("compose-training",
             {{"setting", SettingName(setting)},
              {"gold", a.gold.empty() ? OrderedJson(nullptr) : OrderedJson(a.gold)},
              {"generated",
               a.generated.empty() ? OrderedJson(nullptr) : OrderedJson(a.generated)},
              {"generated_split", a.generated_split},
              {"factor", a.options.factor},
              {"base_size", a.base_size ? OrderedJson(*a.base_size) : OrderedJson(nullptr)},
              {"invert_mapping", a.options.invert_mapping},
              {"seed", a.options.seed},
              {"out", a.out}});
  return 0;
}

}  // namespace
}  // namespace manipgen

int main(int argc, char** argv) {
  using namespace manipgen;
  CLI::App app("manipgen: manipulated-news dataset toolkit", "manipgen");
  app.require_subcommand(1);
  app.fallthrough();
  auto fmt = std::make_shared<JsonConfig>();
  app.config_formatter(fmt);
  app.set_config("--config", "", "JSON file of option values (flags take precedence)");
  app.allow_config_extras(CLI::config_extras_mode::error);

  GenerateArgs generate;
  StatsArgs stats;
  SplitArgs split;
  SampleArgs sample;
  ServeArgs serve;
  AgreementArgs agreement;
  TrainArgs train;
  EvaluateArgs evaluate;
  ComposeArgs compose;
  AddGenerate(app, generate);
  AddStats(app, stats);
  AddSplit(app, split);
  AddSample(app, sample);
  AddServe(app, serve);
  AddAgreement(app, agreement);
  AddTrain(app, train);
  AddEvaluate(app, evaluate);
  AddCompose(app, compose);

  for (int i = 1; i < argc; ++i) {
    if (app.get_subcommand_no_throw(argv[i]) != nullptr) {
      fmt->command = argv[i];
      break;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "generate") return RunGenerate(generate);
    if (command == "stats") return RunStats(stats);
    if (command == "split") return RunSplit(split);
    if (command == "sample-study") return RunSample(sample);
    if (command == "serve-annotation") return RunServe(serve);
    if (command == "agreement") return RunAgreement(agreement);
    if (command == "train-baseline") return RunTrain(train);
    if (command == "evaluate") return RunEvaluate(evaluate);
    if (command == "compose-training") return RunCompose(compose);
  } catch (const std::exception& e) {
    std::cerr << "manipgen " << command << ": error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
