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

#ifndef MANIPGEN_ERRORS_H_
#define MANIPGEN_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace manipgen {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input at a known 1-based line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Token lookup against an embedding vocabulary failed.
class OutOfVocabularyError : public Error {
 public:
  explicit OutOfVocabularyError(const std::string& token)
      : Error("token not in vocabulary: " + token), token_(token) {}

  const std::string& token() const { return token_; }

 private:
  std::string token_;
};

}  // namespace manipgen

#endif  // MANIPGEN_ERRORS_H_
