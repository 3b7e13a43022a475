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

#include "manipgen/annotation_server.h"

#include <chrono>
#include <ctime>

#include "httplib.h"

namespace manipgen {
namespace {

using Json = nlohmann::json;

constexpr char kJson[] = "application/json; charset=utf-8";

void Reply(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void ReplyError(httplib::Response& res, int status, const std::string& message) {
  Reply(res, status, nlohmann::ordered_json{{"error", message}});
}

std::string NowUtc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

AnnotationServer::AnnotationServer(AnnotationStore& store, std::string static_dir)
    : store_(store), server_(std::make_unique<httplib::Server>()) {
  httplib::Server& s = *server_;

  s.Get("/api/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string annotator = req.get_param_value("annotator");
    const std::string stage_text = req.get_param_value("stage");
    if (annotator.empty()) return ReplyError(res, 400, "missing 'annotator' parameter");
    if (stage_text != "1" && stage_text != "2") {
      return ReplyError(res, 400, "'stage' must be 1 or 2");
    }
    const auto task = store_.NextTask(annotator, stage_text == "1" ? 1 : 2);
    if (!task) return Reply(res, 200, {{"status", "done"}});
    Reply(res, 200, TaskPayload(*task));
  });

  s.Post("/api/labels", [this](const httplib::Request& req, httplib::Response& res) {
    Json body;
    try {
      body = Json::parse(req.body);
    } catch (const Json::exception&) {
      return ReplyError(res, 400, "body is not valid JSON");
    }
    if (!body.is_object()) return ReplyError(res, 400, "body must be a JSON object");
    AnnotationLabel label;
    try {
      label.task_id = body.at("task_id").get<std::string>();
      label.annotator_id = body.at("annotator_id").get<std::string>();
      label.stage = body.at("stage").get<int>();
      label.value = body.at("value").get<std::string>();
    } catch (const Json::exception&) {
      return ReplyError(res, 400,
                        "expected {task_id, annotator_id, stage, value}");
    }
    label.timestamp = NowUtc();
    try {
      const LabelAck ack = store_.Record(label);
      nlohmann::ordered_json out{{"status", "stored"}, {"replaced", ack.replaced}};
      if (ack.previous_value) out["previous_value"] = *ack.previous_value;
      Reply(res, 200, out);
    } catch (const UnknownTaskError& e) {
      ReplyError(res, 404, e.what());
    } catch (const LabelDomainError& e) {
      ReplyError(res, 400, e.what());
    } catch (const Error& e) {
      ReplyError(res, 500, e.what());
    }
  });

  s.Get("/api/progress", [this](const httplib::Request&, httplib::Response& res) {
    Reply(res, 200, store_.Progress());
  });

  s.Get("/api/agreement", [this](const httplib::Request&, httplib::Response& res) {
    const auto pair = store_.AgreementPair();
    if (!pair) {
      return Reply(res, 200, {{"status", "insufficient_data"},
                              {"reason", "fewer than two annotators"}});
    }
    Reply(res, 200, store_.Agreement().ToJson());
  });

  s.Get("/api/veracity_stats", [this](const httplib::Request&, httplib::Response& res) {
    try {
      Reply(res, 200, store_.Veracity().ToJson());
    } catch (const Error& e) {
      ReplyError(res, 500, e.what());
    }
  });

  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      res.set_content(nlohmann::ordered_json{{"error", "not found"}}.dump(), kJson);
    }
  });

  if (!static_dir.empty() && !s.set_mount_point("/", static_dir)) {
    throw Error("cannot serve static directory: " + static_dir);
  }
}

AnnotationServer::~AnnotationServer() { Stop(); }

int AnnotationServer::Bind(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host)
                              : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void AnnotationServer::Serve() { server_->listen_after_bind(); }

void AnnotationServer::Stop() {
  if (server_) server_->stop();
}

}  // namespace manipgen
