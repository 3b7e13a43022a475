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

#include "manipgen/corpus.h"

#include <unicode/uchar.h>
#include <unicode/uscript.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "manipgen/errors.h"
#include "manipgen/rng.h"
#include "manipgen/unicode.h"

namespace manipgen {
namespace {

constexpr char32_t kTatweel = 0x0640;

std::string_view TrimView(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string AutoSentenceId(std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "s%06zu", ordinal);
  return buf;
}

// "# key = value" -> (key, value).
std::optional<std::pair<std::string, std::string>> ParseCommentKey(
    std::string_view line) {
  line.remove_prefix(1);
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) return std::nullopt;
  const std::string_view key = TrimView(line.substr(0, eq));
  const std::string_view value = TrimView(line.substr(eq + 1));
  if (key.empty() || value.empty()) return std::nullopt;
  return std::make_pair(std::string(key), std::string(value));
}

bool IsArabicMark(char32_t c) {
  if (u_charType(static_cast<UChar32>(c)) != U_NON_SPACING_MARK) return false;
  return (c >= 0x0610 && c <= 0x061A) || (c >= 0x064B && c <= 0x065F) ||
         c == 0x0670 || (c >= 0x06D6 && c <= 0x06ED) ||
         (c >= 0x08D3 && c <= 0x08FF);
}

bool IsKeptDigit(char32_t c) {
  return (c >= U'0' && c <= U'9') || (c >= 0x0660 && c <= 0x0669) ||
         (c >= 0x06F0 && c <= 0x06F9);
}

bool IsKeptLetter(char32_t c) {
  const auto uc = static_cast<UChar32>(c);
  if (!u_isalpha(uc)) return false;
  UErrorCode status = U_ZERO_ERROR;
  const UScriptCode script = uscript_getScript(uc, &status);
  if (U_FAILURE(status)) return false;
  return script == USCRIPT_ARABIC || script == USCRIPT_LATIN;
}

bool IsUrlChunk(std::string_view chunk) {
  if (chunk.find("://") != std::string_view::npos) return true;
  if (chunk.size() >= 4) {
    std::string head(chunk.substr(0, 4));
    std::transform(head.begin(), head.end(), head.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (head == "www.") return true;
  }
  return false;
}

bool IsEmoticonChunk(std::string_view chunk) {
  static const std::set<std::string_view> kEmoticons = {
      ":)",  ":-)", ":(",  ":-(", ":D",  ":-D", ";)",  ";-)", ":P",
      ":-P", ":p",  ":-p", ":O",  ":-O", ":o",  ":'(", ":/",  ":-/",
      ":*",  "<3",  "^_^", "-_-", "=)",  "=(",  ";D",  "xD",  "XD",
      "B-)", ":|",  ":-|", ":S",  ":s",  "o_O", "O_o"};
  return kEmoticons.count(chunk) > 0;
}

// Collapses every run of >= 3 identical code points to a single one.
std::u32string CollapseLongRuns(const std::u32string& in) {
  std::u32string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    std::size_t j = i;
    while (j < in.size() && in[j] == in[i]) ++j;
    const std::size_t run = j - i;
    out.append(run >= 3 ? 1 : run, in[i]);
    i = j;
  }
  return out;
}

void CheckTokenWritable(const Token& token) {
  if (token.surface.empty() || token.pos.empty()) {
    throw Error("cannot write token with empty field");
  }
  for (const std::string* field : {&token.surface, &token.pos}) {
    if (field->find_first_of("\t\n\r") != std::string::npos) {
      throw Error("token field contains tab or newline: " + *field);
    }
  }
  if (token.surface.front() == '#') {
    throw Error("token surface would be read back as a comment: " +
                token.surface);
  }
}

std::string RequiredString(const nlohmann::json& obj, const char* key,
                           std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ParseError(line, std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

std::string OptionalField(const nlohmann::json& obj, const char* key,
                          std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return "";
  if (!it->is_string()) {
    throw ParseError(line, std::string("field '") + key + "' is not a string");
  }
  return it->get<std::string>();
}

std::optional<std::string> NullableField(const nlohmann::json& obj,
                                         const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw ParseError(line, std::string("field '") + key + "' is not a string");
  }
  return it->get<std::string>();
}

}  // namespace

std::string SentenceText(const std::vector<Token>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i].surface;
  }
  return out;
}

std::vector<Sentence> ParsePosCorpus(std::istream& in) {
  std::vector<Sentence> sentences;
  std::set<std::string> seen_ids;
  Sentence current;
  std::optional<std::string> pending_id;
  std::optional<std::string> pending_article;
  std::size_t pending_id_line = 0;
  std::size_t line_no = 0;

  const auto flush = [&]() {
    if (current.tokens.empty()) return;
    current.id = pending_id ? *pending_id : AutoSentenceId(sentences.size() + 1);
    if (!seen_ids.insert(current.id).second) {
      throw ParseError(pending_id ? pending_id_line : line_no,
                       "duplicate sentence id '" + current.id + "'");
    }
    current.source_article = pending_article;
    sentences.push_back(std::move(current));
    current = Sentence{};
    pending_id.reset();
    pending_article.reset();
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (TrimView(line).empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') {
      if (current.tokens.empty()) {
        if (auto kv = ParseCommentKey(line)) {
          if (kv->first == "sent_id") {
            pending_id = kv->second;
            pending_id_line = line_no;
          } else if (kv->first == "article_id") {
            pending_article = kv->second;
          }
        }
      }
      continue;
    }
    if (!IsValidUtf8(line)) throw ParseError(line_no, "invalid UTF-8");
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(line_no, "expected 2 tab-separated columns, found 1");
    }
    if (line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(line_no, "expected 2 tab-separated columns, found more");
    }
    std::string surface = line.substr(0, tab);
    std::string pos = line.substr(tab + 1);
    if (surface.empty()) throw ParseError(line_no, "empty FORM column");
    if (pos.empty()) throw ParseError(line_no, "empty POS column");
    current.tokens.push_back(Token{ToNfc(surface), std::move(pos)});
  }
  flush();
  return sentences;
}

std::vector<Sentence> ReadPosCorpusFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file: " + path);
  return ParsePosCorpus(in);
}

void WritePosCorpus(const std::vector<Sentence>& sentences,
                    std::ostream& out) {
  for (const Sentence& sentence : sentences) {
    if (sentence.tokens.empty()) {
      throw Error("cannot write empty sentence '" + sentence.id + "'");
    }
    out << "# sent_id = " << sentence.id << '\n';
    if (sentence.source_article) {
      out << "# article_id = " << *sentence.source_article << '\n';
    }
    for (const Token& token : sentence.tokens) {
      CheckTokenWritable(token);
      out << token.surface << '\t' << token.pos << '\n';
    }
    out << '\n';
  }
}

std::string NormalizeText(std::string_view raw) {
  const std::string nfc = ToNfc(raw);

  std::string kept_chunks;
  for (const std::string& chunk : SplitWhitespace(nfc)) {
    if (IsUrlChunk(chunk) || IsEmoticonChunk(chunk)) continue;
    if (!kept_chunks.empty()) kept_chunks.push_back(' ');
    kept_chunks += chunk;
  }

  std::u32string filtered;
  for (char32_t c : ToCodePoints(kept_chunks)) {
    if (c == kTatweel) continue;
    if (IsKeptLetter(c) || IsKeptDigit(c) || IsArabicMark(c)) {
      filtered.push_back(c);
    } else {
      filtered.push_back(U' ');
    }
  }

  // Removing characters can leave a base letter next to a mark it composes
  // with, so recompose before collapsing runs.
  const std::u32string recomposed = ToCodePoints(ToNfc(FromCodePoints(filtered)));
  const std::u32string collapsed = CollapseLongRuns(recomposed);
  return Join(SplitWhitespace(FromCodePoints(collapsed)), " ");
}

std::vector<Article> ReadArticlesJsonl(std::istream& in) {
  std::vector<Article> articles;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (TrimView(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");
    Article a;
    a.newspaper_name_ar = OptionalField(obj, "newspaper_name_ar", line_no);
    a.newspaper_name_en = OptionalField(obj, "newspaper_name_en", line_no);
    a.country = OptionalField(obj, "country", line_no);
    a.newspaper_link = OptionalField(obj, "newspaper_link", line_no);
    a.title = ToNfc(RequiredString(obj, "title", line_no));
    a.content = ToNfc(RequiredString(obj, "content", line_no));
    a.summary = NullableField(obj, "summary", line_no);
    a.author = NullableField(obj, "author", line_no);
    a.url = OptionalField(obj, "url", line_no);
    a.date = OptionalField(obj, "date", line_no);
    a.topic = OptionalField(obj, "topic", line_no);
    if (a.title.empty()) throw ParseError(line_no, "empty title");
    if (a.content.empty()) throw ParseError(line_no, "empty content");
    articles.push_back(std::move(a));
  }
  return articles;
}

std::vector<Article> ReadArticlesJsonlFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open articles file: " + path);
  return ReadArticlesJsonl(in);
}

void WriteArticlesJsonl(const std::vector<Article>& articles,
                        std::ostream& out) {
  for (const Article& a : articles) {
    nlohmann::ordered_json obj;
    obj["newspaper_name_ar"] = a.newspaper_name_ar;
    obj["newspaper_name_en"] = a.newspaper_name_en;
    obj["country"] = a.country;
    obj["newspaper_link"] = a.newspaper_link;
    obj["title"] = a.title;
    obj["content"] = a.content;
    obj["summary"] = a.summary ? nlohmann::ordered_json(*a.summary) : nullptr;
    obj["author"] = a.author ? nlohmann::ordered_json(*a.author) : nullptr;
    obj["url"] = a.url;
    obj["date"] = a.date;
    obj["topic"] = a.topic;
    out << obj.dump() << '\n';
  }
}

const std::vector<std::string>& CanonicalCategories() {
  static const std::vector<std::string> kCategories = {
      "Politics",    "History",         "Society",     "Media",
      "Entertainments", "Weather",      "Sports",      "Social Media",
      "Health",      "Culture and Art", "Economy",     "Religion",
      "Education",   "Technology",      "Fashion",     "Local News",
      "International News"};
  return kCategories;
}

CategoryMap::CategoryMap() {
  for (const std::string& c : CanonicalCategories()) entries_[Key(c)] = c;
}

std::string CategoryMap::Key(std::string_view raw) {
  return Join(SplitWhitespace(FoldCase(ToNfc(raw))), " ");
}

void CategoryMap::Add(std::string_view raw, std::string_view canonical) {
  const auto& canon = CanonicalCategories();
  if (std::find(canon.begin(), canon.end(), canonical) == canon.end()) {
    throw Error("not a canonical category: " + std::string(canonical));
  }
  const std::string key = Key(raw);
  if (key.empty()) throw Error("empty raw category");
  entries_[key] = std::string(canonical);
}

std::optional<std::string> CategoryMap::Find(std::string_view raw) const {
  auto it = entries_.find(Key(raw));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

CategoryMap CategoryMap::Parse(std::istream& in) {
  CategoryMap map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (TrimView(line).empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(line_no, "expected raw<TAB>canonical");
    }
    try {
      map.Add(line.substr(0, tab), TrimView(line.substr(tab + 1)));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return map;
}

CategoryMap CategoryMap::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open category map: " + path);
  return Parse(in);
}

CategoryResult NormalizeCategory(std::string_view raw, const CategoryMap& map) {
  if (auto found = map.Find(raw)) return {*found, std::nullopt};
  return {std::string(kUnknownCategory),
          "unmapped category '" + std::string(raw) + "'"};
}

void ValidateRatios(const SplitRatios& r) {
  if (!(r.train > 0 && r.dev > 0 && r.test > 0)) {
    throw Error("split ratios must all be positive");
  }
  if (std::fabs(r.train + r.dev + r.test - 1.0) > 1e-9) {
    throw Error("split ratios must sum to 1");
  }
}

SplitRatios ParseRatios(std::string_view text) {
  std::vector<double> values;
  std::stringstream ss{std::string(text)};
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(part, &used));
      if (TrimView(part.substr(used)).size() != 0) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw Error("invalid ratio '" + part + "'");
    }
  }
  if (values.size() != 3) throw Error("expected three ratios train,dev,test");
  SplitRatios ratios{values[0], values[1], values[2]};
  ValidateRatios(ratios);
  return ratios;
}

std::array<std::size_t, 3> SplitSizes(std::size_t n, const SplitRatios& ratios) {
  ValidateRatios(ratios);
  // The epsilon keeps products like 10 * 0.1 from flooring to 0.
  const auto part = [n](double r) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * r + 1e-9));
  };
  const std::size_t dev = part(ratios.dev);
  const std::size_t test = part(ratios.test);
  return {n - dev - test, dev, test};
}

Splits<Article> SplitArticles(const std::vector<Article>& articles,
                              const SplitRatios& ratios, uint64_t seed) {
  if (articles.empty()) throw Error("cannot split an empty article list");
  const auto sizes = SplitSizes(articles.size(), ratios);
  std::vector<std::size_t> order(articles.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.Shuffle(order);

  Splits<Article> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Article& a = articles[order[i]];
    if (i < sizes[0]) {
      out.train.push_back(a);
    } else if (i < sizes[0] + sizes[1]) {
      out.dev.push_back(a);
    } else {
      out.test.push_back(a);
    }
  }
  return out;
}

}  // namespace manipgen
