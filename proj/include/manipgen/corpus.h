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

// POS-tagged sentence corpora, article metadata and article-level splits.
//
// Corpus files are two-column UTF-8 TSV (FORM, POS) with a blank line after
// each sentence. Lines starting with '#' are comments; two comment keys are
// recognised so that ids survive a write/read cycle:
//
//   # sent_id = ATB-00012
//   # article_id = ATB-article-7

#ifndef MANIPGEN_CORPUS_H_
#define MANIPGEN_CORPUS_H_

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace manipgen {

struct Token {
  std::string surface;
  std::string pos;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::string id;
  std::vector<Token> tokens;
  std::optional<std::string> source_article;

  bool operator==(const Sentence&) const = default;
};

// Space-joined surfaces.
std::string SentenceText(const std::vector<Token>& tokens);

// Throws ParseError on malformed lines. Sentences without a sent_id comment
// get sequential ids "s000001", "s000002", ...
std::vector<Sentence> ParsePosCorpus(std::istream& in);

std::vector<Sentence> ReadPosCorpusFile(const std::string& path);

void WritePosCorpus(const std::vector<Sentence>& sentences, std::ostream& out);

// Light cleanup applied before embedding lookups: drops URLs, emoticons,
// punctuation and symbols (keeps Arabic and Latin letters, Arabic marks and
// digits), strips tatweel, collapses runs of three or more identical
// characters to one, collapses whitespace and trims. Idempotent.
std::string NormalizeText(std::string_view raw);

struct Article {
  std::string newspaper_name_ar;
  std::string newspaper_name_en;
  std::string country;
  std::string newspaper_link;
  std::string title;
  std::string content;
  std::optional<std::string> summary;
  std::optional<std::string> author;
  std::string url;
  std::string date;
  std::string topic;

  bool operator==(const Article&) const = default;
};

// JSONL, one article per line, snake_case field names.
std::vector<Article> ReadArticlesJsonl(std::istream& in);
std::vector<Article> ReadArticlesJsonlFile(const std::string& path);
void WriteArticlesJsonl(const std::vector<Article>& articles,
                        std::ostream& out);

inline constexpr std::string_view kUnknownCategory = "Unknown";

// The 17 thematic categories articles are normalized into.
const std::vector<std::string>& CanonicalCategories();

class CategoryMap {
 public:
  // Starts with identity entries for every canonical category.
  CategoryMap();

  // Throws Error if `canonical` is not one of CanonicalCategories().
  void Add(std::string_view raw, std::string_view canonical);

  std::optional<std::string> Find(std::string_view raw) const;

  std::size_t size() const { return entries_.size(); }

  // TSV `raw<TAB>canonical`; '#' comments and blank lines skipped.
  static CategoryMap Parse(std::istream& in);
  static CategoryMap Load(const std::string& path);

 private:
  static std::string Key(std::string_view raw);

  std::map<std::string, std::string> entries_;
};

struct CategoryResult {
  std::string category;
  std::optional<std::string> warning;
};

// Unmapped input yields kUnknownCategory and a warning.
CategoryResult NormalizeCategory(std::string_view raw, const CategoryMap& map);

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

// Throws Error unless all ratios are positive and sum to 1 within 1e-9.
void ValidateRatios(const SplitRatios& ratios);

// Parses "0.8,0.1,0.1".
SplitRatios ParseRatios(std::string_view text);

// Sizes for n items: dev and test get floor(n * ratio), train the remainder.
std::array<std::size_t, 3> SplitSizes(std::size_t n, const SplitRatios& ratios);

template <typename T>
struct Splits {
  std::vector<T> train;
  std::vector<T> dev;
  std::vector<T> test;
};

// Seeded shuffle of whole articles, then cut by SplitSizes.
Splits<Article> SplitArticles(const std::vector<Article>& articles,
                              const SplitRatios& ratios, uint64_t seed);

}  // namespace manipgen

#endif  // MANIPGEN_CORPUS_H_
