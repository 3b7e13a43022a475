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

#include "manipgen/embeddings.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "manipgen/errors.h"
#include "manipgen/rng.h"

namespace manipgen {
namespace {

EmbeddingIndex ParseVec(const std::string& text, std::vector<std::string>* warnings = nullptr) {
  std::istringstream in(text);
  return EmbeddingIndex::Parse(in, warnings);
}

std::size_t ParseErrorLine(const std::string& text) {
  try {
    ParseVec(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

TEST(LoadVectorsTest, ParsesHeaderAndRows) {
  const EmbeddingIndex index = ParseVec("2 3\na 1 0 0\nb 0 1 0\n");
  EXPECT_EQ(index.size(), 2u);
  EXPECT_EQ(index.dim(), 3u);
  EXPECT_TRUE(index.Contains("a"));
  EXPECT_FALSE(index.Contains("c"));
  EXPECT_EQ(index.Vector("b")[1], 1.0f);
}

TEST(LoadVectorsTest, MalformedRowsReportLine) {
  EXPECT_EQ(ParseErrorLine("2 3\na 1 0 0\nb 0 1\n"), 3u);
  EXPECT_EQ(ParseErrorLine("1 2\na 1 x\n"), 2u);
  EXPECT_EQ(ParseErrorLine("1 2\na 1 2 3\n"), 2u);
  EXPECT_EQ(ParseErrorLine("3 2\na 1 2\n"), 1u);
  EXPECT_EQ(ParseErrorLine("two 2\n"), 1u);
  EXPECT_EQ(ParseErrorLine(""), 1u);
}

TEST(LoadVectorsTest, DuplicateKeepsFirstWithWarning) {
  std::vector<std::string> warnings;
  const EmbeddingIndex index = ParseVec("2 2\na 1 0\na 0 1\n", &warnings);
  EXPECT_EQ(index.size(), 1u);
  EXPECT_EQ(index.Vector("a")[0], 1.0f);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(LoadVectorsTest, SaveLoadRoundTripProperty) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.Uniform(30), dim = 1 + rng.Uniform(10);
    std::vector<std::string> vocab;
    std::vector<float> matrix;
    for (std::size_t i = 0; i < n; ++i) {
      vocab.push_back("كلمة" + std::to_string(i));
      for (std::size_t d = 0; d < dim; ++d) {
        matrix.push_back(static_cast<float>((rng.UniformReal() - 0.5) * std::pow(10.0, rng.Uniform(9) - 4.0)));
      }
    }
    const EmbeddingIndex index(dim, vocab, matrix);
    std::ostringstream out;
    index.Save(out);
    EXPECT_EQ(ParseVec(out.str()), index);
  }
}

TEST(CosineTest, Examples) {
  const std::vector<float> x{1, 0, 0}, e1{1, 0}, e2{0, 1}, diag{1, 1};
  EXPECT_DOUBLE_EQ(Cosine(x, x), 1.0);
  EXPECT_DOUBLE_EQ(Cosine(e1, e2), 0.0);
  EXPECT_NEAR(Cosine(e1, diag), 0.70710678, 1e-8);
  const std::vector<float> zero{0, 0};
  EXPECT_THROW(Cosine(e1, zero), Error);
  EXPECT_THROW(Cosine(e1, x), Error);
}

TEST(CosineTest, SelfAndSymmetryProperty) {
  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t dim = 1 + rng.Uniform(20);
    std::vector<float> a(dim), b(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      a[d] = static_cast<float>(rng.UniformReal() * 2 - 1);
      b[d] = static_cast<float>(rng.UniformReal() * 2 - 1);
    }
    EXPECT_NEAR(Cosine(a, a), 1.0, 1e-12);
    EXPECT_EQ(Cosine(a, b), Cosine(b, a));
    EXPECT_LE(std::abs(Cosine(a, b)), 1.0);
  }
}

TEST(KNearestTest, DuplicateVectorIsNearest) {
  const EmbeddingIndex index = ParseVec("3 2\na 1 0\nb 1 0\nc 0 1\n");
  const auto result = KNearest(index, "a", 1);
  ASSERT_EQ(result.size(), 1u);
  EXPECT_EQ(result[0].token, "b");
  EXPECT_DOUBLE_EQ(result[0].similarity, 1.0);
}

TEST(KNearestTest, ErrorsAndBounds) {
  const EmbeddingIndex index = ParseVec("3 2\na 1 0\nb 1 1\nz 0 0\n");
  EXPECT_THROW(KNearest(index, "missing", 1), OutOfVocabularyError);
  EXPECT_THROW(KNearest(index, "z", 1), Error);
  EXPECT_THROW(KNearest(index, "a", 0), Error);
  const auto all = KNearest(index, "a", 10);
  ASSERT_EQ(all.size(), 1u);  // self and the zero row are excluded
  EXPECT_EQ(all[0].token, "b");
}

TEST(KNearestTest, TiesBreakByToken) {
  const EmbeddingIndex index = ParseVec("4 2\nq 1 0\nc 0 1\nb 0 1\na 0 1\n");
  const auto result = KNearest(index, "q", 3);
  ASSERT_EQ(result.size(), 3u);
  EXPECT_EQ(result[0].token, "a");
  EXPECT_EQ(result[1].token, "b");
  EXPECT_EQ(result[2].token, "c");
}

TEST(KNearestTest, MatchesExhaustiveSortProperty) {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 20, dim = 2 + rng.Uniform(6);
    std::vector<std::string> vocab;
    std::vector<std::vector<float>> rows;
    std::vector<float> matrix;
    for (std::size_t i = 0; i < n; ++i) {
      vocab.push_back("t" + std::to_string(rng.Uniform(1000)) + "_" + std::to_string(i));
      std::vector<float> v(dim);
      for (float& x : v) x = static_cast<float>(rng.UniformReal() * 2 - 1);
      if (i > 0 && rng.Uniform(8) == 0) v = rows[rng.Uniform(i)];
      rows.push_back(v);
      matrix.insert(matrix.end(), v.begin(), v.end());
    }
    const EmbeddingIndex index(dim, vocab, matrix);
    const std::size_t q = rng.Uniform(n);
    std::vector<Neighbor> brute;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != q) brute.push_back({vocab[i], Cosine(rows[q], rows[i])});
    }
    std::sort(brute.begin(), brute.end(), NeighborBefore);
    brute.resize(5);
    const auto fast = KNearest(index, vocab[q], 5);
    const auto full = index.Nearest(vocab[q], 5, EmbeddingIndex::ScanMode::kFullSort);
    EXPECT_EQ(fast, full);
    ASSERT_EQ(fast.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_EQ(fast[i].token, brute[i].token);
      EXPECT_NEAR(fast[i].similarity, brute[i].similarity, 1e-12);
    }
  }
}

TEST(NeighborTableTest, ReturnsListsAsGiven) {
  NeighborTable table;
  table.Set("x", {{"x", 1.0}, {"b", 0.5}, {"a", 0.9}, {"c", 0.1}});
  EXPECT_TRUE(table.Contains("x"));
  const auto result = table.Nearest("x", 2);
  ASSERT_EQ(result.size(), 2u);
  EXPECT_EQ(result[0].token, "b");
  EXPECT_EQ(result[1].token, "a");
  EXPECT_THROW(table.Nearest("y", 1), OutOfVocabularyError);
}

}  // namespace
}  // namespace manipgen
