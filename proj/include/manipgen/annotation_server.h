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

// HTTP+JSON front of an AnnotationStore.
//
//   GET  /api/tasks/next?annotator=ID&stage=N   task payload or {"status":"done"}
//   POST /api/labels                            {task_id, annotator_id, stage, value}
//   GET  /api/progress
//   GET  /api/agreement
//   GET  /api/veracity_stats
//
// Errors are {"error": message} with a 4xx status.

#ifndef MANIPGEN_ANNOTATION_SERVER_H_
#define MANIPGEN_ANNOTATION_SERVER_H_

#include <memory>
#include <string>

#include "manipgen/annotation.h"

namespace httplib {
class Server;
}

namespace manipgen {

class AnnotationServer {
 public:
  // `static_dir`, when non-empty, is served at "/" (the browser UI).
  explicit AnnotationServer(AnnotationStore& store, std::string static_dir = "");
  ~AnnotationServer();

  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  // Binds without serving; port 0 picks a free port. Returns the bound port.
  // Throws Error on bind failure.
  int Bind(const std::string& host, int port);

  // Blocks until Stop().
  void Serve();

  void Stop();

 private:
  AnnotationStore& store_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace manipgen

#endif  // MANIPGEN_ANNOTATION_SERVER_H_
