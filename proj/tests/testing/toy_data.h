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

// Synthetic POS-tagged corpus and matching word vectors for tests.
//
// Words are random pseudo-Arabic letter strings. Each substitutable word
// has six embedding neighbors that never occur in the corpus, three
// cluster-mates that do, and a same-stem neighbor ("و" + word) that the
// character-ratio filter must reject. Corpus numbers are multiples of ten.

#ifndef MANIPGEN_TESTS_TESTING_TOY_DATA_H_
#define MANIPGEN_TESTS_TESTING_TOY_DATA_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "manipgen/corpus.h"
#include "manipgen/embeddings.h"

namespace manipgen::testing {

struct ToyOptions {
  uint64_t seed = 1;
  std::size_t sentences = 500;
  std::size_t vocab = 1000;
  std::size_t dim = 16;
};

struct ToyData {
  std::vector<Sentence> sentences;
  EmbeddingIndex index;
};

ToyData MakeToyData(const ToyOptions& options = {});

// Writes corpus.tsv and vectors.vec into `dir` (created if missing).
void WriteToyData(const ToyData& data, const std::string& dir);

// Fresh empty directory under the system temp dir.
std::string MakeTempDir(const std::string& prefix);

std::string ReadFile(const std::string& path);

}  // namespace manipgen::testing

#endif  // MANIPGEN_TESTS_TESTING_TOY_DATA_H_
