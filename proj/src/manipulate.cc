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

#include "manipgen/manipulate.h"

#include <algorithm>
#include <set>
#include <tuple>

#include "manipgen/errors.h"
#include "manipgen/unicode.h"

namespace manipgen {
namespace {

struct Match {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t size = 0;
};

// Longest common substring of a[alo, ahi) and b[blo, bhi).
Match LongestMatch(std::u32string_view a, std::size_t alo, std::size_t ahi,
                   std::u32string_view b, std::size_t blo, std::size_t bhi) {
  Match best{alo, blo, 0};
  const std::size_t width = bhi - blo;
  // run[j] = length of the common suffix of a[..i] and b[..blo + j].
  std::vector<std::size_t> prev(width + 1, 0), cur(width + 1, 0);
  for (std::size_t i = alo; i < ahi; ++i) {
    for (std::size_t j = blo; j < bhi; ++j) {
      const std::size_t col = j - blo + 1;
      if (a[i] == b[j]) {
        cur[col] = prev[col - 1] + 1;
        // Strict '>' while scanning i then j keeps the earliest start in a,
        // then in b, among equally long matches.
        if (cur[col] > best.size) {
          best = {i + 1 - cur[col], j + 1 - cur[col], cur[col]};
        }
      } else {
        cur[col] = 0;
      }
    }
    std::swap(prev, cur);
    std::fill(cur.begin(), cur.end(), 0);
  }
  return best;
}

struct DigitScript {
  char32_t zero;
};

std::optional<DigitScript> ScriptOf(char32_t c) {
  for (char32_t zero : {U'0', char32_t{0x0660}, char32_t{0x06F0}}) {
    if (c >= zero && c <= zero + 9) return DigitScript{zero};
  }
  return std::nullopt;
}

bool IsNegation(const Token& token) { return token.pos == kNegationTag; }

}  // namespace

std::size_t MatchingCharacters(std::u32string_view a, std::u32string_view b) {
  std::size_t total = 0;
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>>
      pending = {{0, a.size(), 0, b.size()}};
  while (!pending.empty()) {
    const auto [alo, ahi, blo, bhi] = pending.back();
    pending.pop_back();
    if (alo >= ahi || blo >= bhi) continue;
    const Match m = LongestMatch(a, alo, ahi, b, blo, bhi);
    if (m.size == 0) continue;
    total += m.size;
    pending.emplace_back(alo, m.a, blo, m.b);
    pending.emplace_back(m.a + m.size, ahi, m.b + m.size, bhi);
  }
  return total;
}

double CharRatio(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty()) throw Error("char ratio of an empty string");
  const std::u32string ca = ToCodePoints(a);
  const std::u32string cb = ToCodePoints(b);
  const double matched = static_cast<double>(
      std::max(MatchingCharacters(ca, cb), MatchingCharacters(cb, ca)));
  return 2.0 * matched / static_cast<double>(ca.size() + cb.size());
}

void ManipulationConfig::Validate() const {
  if (!(ratio_threshold > 0.0 && ratio_threshold <= 1.0)) {
    throw Error("ratio_threshold must be in (0, 1]");
  }
  if (candidates_per_token == 0 || number_variants == 0 ||
      max_variants_per_sentence == 0 || neighbor_scan_limit == 0) {
    throw Error("manipulation counts must be at least 1");
  }
}

SelectionResult SelectSubstitutes(const NeighborSource& index,
                                  std::string_view token,
                                  const ManipulationConfig& config) {
  SelectionResult result;
  const std::string query = ToNfc(token);
  if (!index.Contains(query)) {
    result.out_of_vocabulary = true;
    return result;
  }
  const std::vector<Neighbor> neighbors =
      index.Nearest(query, config.neighbor_scan_limit);
  for (std::size_t rank = 0; rank < neighbors.size(); ++rank) {
    if (result.candidates.size() >= config.candidates_per_token) break;
    const Neighbor& n = neighbors[rank];
    const double ratio = CharRatio(query, n.token);
    if (ratio > config.ratio_threshold) continue;
    result.candidates.push_back({n.token, n.similarity, rank, ratio});
  }
  return result;
}

bool IsDigitToken(std::string_view token) {
  if (token.empty() || !IsValidUtf8(token)) return false;
  const std::u32string cps = ToCodePoints(token);
  const auto first = ScriptOf(cps.front());
  if (!first) return false;
  return std::all_of(cps.begin(), cps.end(), [&](char32_t c) {
    const auto s = ScriptOf(c);
    return s && s->zero == first->zero;
  });
}

std::optional<std::string> SubstituteNumber(std::string_view token, Rng& rng) {
  if (!IsDigitToken(token)) return std::nullopt;
  const std::u32string original = ToCodePoints(token);
  const char32_t zero = ScriptOf(original.front())->zero;
  std::u32string out(original.size(), zero);
  // Every length has at least one valid alternative, so this terminates.
  do {
    for (std::size_t i = 0; i < out.size(); ++i) {
      const bool leading = i == 0 && out.size() > 1;
      const uint64_t digit = leading ? 1 + rng.Uniform(9) : rng.Uniform(10);
      out[i] = zero + static_cast<char32_t>(digit);
    }
  } while (out == original);
  return FromCodePoints(out);
}

std::string_view KindName(ManipulationKind kind) {
  switch (kind) {
    case ManipulationKind::kEmbeddingSwap:
      return "embedding_swap";
    case ManipulationKind::kNumberRandomize:
      return "number_randomize";
    case ManipulationKind::kNegationDelete:
      return "negation_delete";
  }
  return "";
}

ManipulationKind ParseKind(std::string_view name) {
  for (auto kind :
       {ManipulationKind::kEmbeddingSwap, ManipulationKind::kNumberRandomize,
        ManipulationKind::kNegationDelete}) {
    if (KindName(kind) == name) return kind;
  }
  throw Error("unknown manipulation kind: " + std::string(name));
}

std::vector<Token> ApplyRecords(const std::vector<Token>& source,
                                const std::vector<ManipulationRecord>& records) {
  std::vector<Token> tokens = source;
  std::vector<bool> deleted(source.size(), false);
  std::set<std::size_t> touched;
  for (const ManipulationRecord& r : records) {
    if (r.token_index >= source.size()) {
      throw Error("record index out of range");
    }
    if (!touched.insert(r.token_index).second) {
      throw Error("two records touch token " + std::to_string(r.token_index));
    }
    const Token& at = source[r.token_index];
    if (at.surface != r.original || at.pos != r.pos) {
      throw Error("record does not match source token " +
                  std::to_string(r.token_index));
    }
    if (r.kind == ManipulationKind::kNegationDelete) {
      if (!r.substitute.empty()) throw Error("deletion with a substitute");
      deleted[r.token_index] = true;
    } else {
      if (r.substitute.empty()) throw Error("substitution without a substitute");
      tokens[r.token_index].surface = r.substitute;
    }
  }
  std::vector<Token> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!deleted[i]) out.push_back(std::move(tokens[i]));
  }
  return out;
}

ManipulatedSentence RemoveNegation(const Sentence& sentence,
                                   std::size_t token_index) {
  if (token_index >= sentence.tokens.size()) {
    throw Error("token index out of range");
  }
  const Token& token = sentence.tokens[token_index];
  if (!IsNegation(token)) {
    throw Error("token " + std::to_string(token_index) + " is tagged " +
                token.pos + ", not NEG_PART");
  }
  if (sentence.tokens.size() == 1) {
    throw Error("removing the only token would leave an empty sentence");
  }
  ManipulationRecord record;
  record.token_index = token_index;
  record.original = token.surface;
  record.pos = token.pos;
  record.kind = ManipulationKind::kNegationDelete;
  ManipulatedSentence out;
  out.source_id = sentence.id;
  out.records = {record};
  out.tokens = ApplyRecords(sentence.tokens, out.records);
  return out;
}

std::vector<TokenOptions> BuildTokenOptions(const Sentence& sentence,
                                            const NeighborSource& index,
                                            const ManipulationConfig& config) {
  config.Validate();
  Rng rng(DeriveSeed(config.seed, sentence.id));
  std::vector<TokenOptions> all;

  const std::size_t negations = static_cast<std::size_t>(std::count_if(
      sentence.tokens.begin(), sentence.tokens.end(), IsNegation));
  const bool only_negations = negations == sentence.tokens.size();
  std::size_t negations_seen = 0;

  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    const Token& token = sentence.tokens[i];
    if (!config.target_pos.count(token.pos)) continue;

    TokenOptions opts;
    opts.token_index = i;
    ManipulationRecord base;
    base.token_index = i;
    base.original = token.surface;
    base.pos = token.pos;

    if (IsNegation(token)) {
      ++negations_seen;
      // Keep at least one token when every token is a negation.
      if (only_negations && negations_seen == negations) continue;
      base.kind = ManipulationKind::kNegationDelete;
      opts.options.push_back(base);
    } else if (token.pos == kNumberTag && IsDigitToken(token.surface)) {
      base.kind = ManipulationKind::kNumberRandomize;
      std::set<std::string> drawn;
      // Short numbers may have fewer distinct alternatives than requested.
      const std::size_t attempts = 64 * config.number_variants;
      for (std::size_t a = 0;
           a < attempts && drawn.size() < config.number_variants; ++a) {
        std::string value = *SubstituteNumber(token.surface, rng);
        if (!drawn.insert(value).second) continue;
        ManipulationRecord r = base;
        r.substitute = std::move(value);
        opts.options.push_back(std::move(r));
      }
    } else {
      base.kind = ManipulationKind::kEmbeddingSwap;
      for (const SubstitutionCandidate& c :
           SelectSubstitutes(index, token.surface, config).candidates) {
        ManipulationRecord r = base;
        r.substitute = c.token;
        r.rank = c.rank;
        r.ratio = c.ratio;
        opts.options.push_back(std::move(r));
      }
    }
    if (!opts.options.empty()) all.push_back(std::move(opts));
  }
  return all;
}

std::vector<ManipulatedSentence> GenerateVariants(
    const Sentence& sentence, const NeighborSource& index,
    const ManipulationConfig& config) {
  if (sentence.tokens.empty()) throw Error("cannot manipulate an empty sentence");
  const std::vector<TokenOptions> options =
      BuildTokenOptions(sentence, index, config);
  std::vector<ManipulatedSentence> variants;
  if (options.empty()) return variants;

  std::vector<std::size_t> choice(options.size(), 0);
  while (variants.size() < config.max_variants_per_sentence) {
    ManipulatedSentence v;
    v.source_id = sentence.id;
    v.records.reserve(options.size());
    for (std::size_t t = 0; t < options.size(); ++t) {
      v.records.push_back(options[t].options[choice[t]]);
    }
    v.tokens = ApplyRecords(sentence.tokens, v.records);
    variants.push_back(std::move(v));

    // Odometer step; the rightmost token varies fastest.
    std::size_t t = options.size();
    while (t > 0) {
      --t;
      if (++choice[t] < options[t].options.size()) break;
      choice[t] = 0;
      if (t == 0) return variants;
    }
  }
  return variants;
}

}  // namespace manipgen
