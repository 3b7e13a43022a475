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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "manipgen/errors.h"
#include "manipgen/unicode.h"

namespace manipgen {
namespace {

double Dot(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return sum;
}

double ClampUnit(double x) { return std::clamp(x, -1.0, 1.0); }

std::vector<std::string_view> SplitSpaces(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    parts.push_back(line.substr(i, j - i));
    i = j;
  }
  return parts;
}

template <typename T>
bool ParseNumber(std::string_view s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

bool NeighborBefore(const Neighbor& a, const Neighbor& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.token < b.token;
}

double Cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw Error("cosine: dimension mismatch");
  const double na = std::sqrt(Dot(a, a));
  const double nb = std::sqrt(Dot(b, b));
  if (na == 0.0 || nb == 0.0) throw Error("cosine: zero-norm vector");
  return ClampUnit(Dot(a, b) / (na * nb));
}

EmbeddingIndex::EmbeddingIndex(std::size_t dim, std::vector<std::string> vocab,
                               std::vector<float> matrix)
    : dim_(dim), vocab_(std::move(vocab)), matrix_(std::move(matrix)) {
  if (dim_ == 0) throw Error("embedding dimension must be positive");
  if (matrix_.size() != vocab_.size() * dim_) {
    throw Error("embedding matrix size does not match vocab * dim");
  }
  for (float x : matrix_) {
    if (!std::isfinite(x)) throw Error("embedding matrix has non-finite entry");
  }
  norms_.resize(vocab_.size());
  row_of_.reserve(vocab_.size());
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (!row_of_.emplace(vocab_[i], i).second) {
      throw Error("duplicate vocabulary token: " + vocab_[i]);
    }
    norms_[i] = std::sqrt(Dot(Row(i), Row(i)));
  }
}

EmbeddingIndex EmbeddingIndex::Parse(std::istream& in,
                                     std::vector<std::string>* warnings) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header line");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = SplitSpaces(line);
  std::size_t declared_count = 0;
  std::size_t dim = 0;
  if (header.size() != 2 || !ParseNumber(header[0], declared_count) ||
      !ParseNumber(header[1], dim) || dim == 0) {
    throw ParseError(1, "header must be '<count> <dim>'");
  }

  std::vector<std::string> vocab;
  std::vector<float> matrix;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t line_no = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(' ') == std::string::npos) continue;
    const auto parts = SplitSpaces(line);
    if (parts.size() != dim + 1) {
      throw ParseError(line_no, "expected " + std::to_string(dim) +
                                    " components, found " +
                                    std::to_string(parts.size() - 1));
    }
    ++rows;
    std::vector<float> row(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      if (!ParseNumber(parts[d + 1], row[d]) || !std::isfinite(row[d])) {
        throw ParseError(line_no, "non-numeric component '" +
                                      std::string(parts[d + 1]) + "'");
      }
    }
    std::string token;
    try {
      token = ToNfc(parts[0]);
    } catch (const Error&) {
      throw ParseError(line_no, "token is not valid UTF-8");
    }
    if (seen.count(token)) {
      if (warnings) {
        warnings->push_back("line " + std::to_string(line_no) +
                            ": duplicate token '" + token +
                            "', keeping first occurrence");
      }
      continue;
    }
    seen.emplace(token, vocab.size());
    vocab.push_back(std::move(token));
    matrix.insert(matrix.end(), row.begin(), row.end());
  }
  if (rows != declared_count) {
    throw ParseError(1, "header declares " + std::to_string(declared_count) +
                            " rows, file has " + std::to_string(rows));
  }
  return EmbeddingIndex(dim, std::move(vocab), std::move(matrix));
}

EmbeddingIndex EmbeddingIndex::Load(const std::string& path,
                                    std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open vector file: " + path);
  return Parse(in, warnings);
}

void EmbeddingIndex::Save(std::ostream& out) const {
  out << vocab_.size() << ' ' << dim_ << '\n';
  char buf[32];
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    out << vocab_[i];
    for (float x : Row(i)) {
      std::snprintf(buf, sizeof(buf), " %.9g", static_cast<double>(x));
      out << buf;
    }
    out << '\n';
  }
}

bool EmbeddingIndex::Contains(std::string_view token) const {
  return row_of_.find(std::string(token)) != row_of_.end();
}

std::size_t EmbeddingIndex::RowOf(std::string_view token) const {
  auto it = row_of_.find(std::string(token));
  if (it == row_of_.end()) throw OutOfVocabularyError(std::string(token));
  return it->second;
}

std::span<const float> EmbeddingIndex::Vector(std::string_view token) const {
  return Row(RowOf(token));
}

std::vector<Neighbor> EmbeddingIndex::Nearest(std::string_view token,
                                              std::size_t k,
                                              ScanMode mode) const {
  const std::size_t query = RowOf(token);
  if (k == 0) throw Error("k must be at least 1");
  if (norms_[query] == 0.0) throw Error("query vector has zero norm: " + vocab_[query]);

  // Scores are computed once with precomputed norms; both modes rank the
  // same (similarity, token) pairs under the same total order.
  const std::span<const float> q = Row(query);
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(vocab_.size());
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (i == query || norms_[i] == 0.0) continue;
    const double sim = ClampUnit(Dot(q, Row(i)) / (norms_[query] * norms_[i]));
    scored.emplace_back(sim, i);
  }
  const auto before = [this](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return vocab_[a.second] < vocab_[b.second];
  };
  const std::size_t n = std::min(k, scored.size());
  if (mode == ScanMode::kFullSort) {
    std::sort(scored.begin(), scored.end(), before);
  } else {
    std::partial_sort(scored.begin(), scored.begin() + n, scored.end(), before);
  }
  std::vector<Neighbor> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(Neighbor{vocab_[scored[i].second], scored[i].first});
  }
  return out;
}

void NeighborTable::Set(std::string token, std::vector<Neighbor> neighbors) {
  lists_[std::move(token)] = std::move(neighbors);
}

bool NeighborTable::Contains(std::string_view token) const {
  return lists_.find(std::string(token)) != lists_.end();
}

std::vector<Neighbor> NeighborTable::Nearest(std::string_view token,
                                             std::size_t k) const {
  auto it = lists_.find(std::string(token));
  if (it == lists_.end()) throw OutOfVocabularyError(std::string(token));
  std::vector<Neighbor> out;
  for (const Neighbor& n : it->second) {
    if (out.size() >= k) break;
    if (n.token == token) continue;
    out.push_back(n);
  }
  return out;
}

}  // namespace manipgen
