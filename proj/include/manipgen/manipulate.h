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

// Lexical substitution over POS-tagged sentences.
//
// A token is manipulated according to its tag:
//   NEG_PART          deleted from the sentence
//   N_NUM (digits)    replaced by a random number of the same length/script
//   everything else   replaced by an embedding neighbor whose character
//                     ratio to the original is at most the threshold, so
//                     that inflected forms of the same word are skipped
//
// Variants of a sentence replace every selected token at once; the option
// lists are combined as a cartesian product.

#ifndef MANIPGEN_MANIPULATE_H_
#define MANIPGEN_MANIPULATE_H_

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "manipgen/corpus.h"
#include "manipgen/embeddings.h"
#include "manipgen/rng.h"

namespace manipgen {

inline constexpr std::string_view kNegationTag = "NEG_PART";
inline constexpr std::string_view kNumberTag = "N_NUM";

// Total length of the blocks matched by Ratcliff/Obershelp: take the longest
// common substring (earliest in `a`, then earliest in `b`), recurse on both
// sides. Operates on code points.
std::size_t MatchingCharacters(std::u32string_view a, std::u32string_view b);

// 2M/T with T the summed code-point lengths and M the larger of
// MatchingCharacters(a, b) and MatchingCharacters(b, a), so the ratio does
// not depend on argument order. Throws Error for an empty argument.
double CharRatio(std::string_view a, std::string_view b);

struct ManipulationConfig {
  std::set<std::string> target_pos = {"N_PROP",   "N_NUM",   "ADJ",
                                      "ADJ_COMP", "ADJ_NUM", "NEG_PART"};
  // Neighbors with CharRatio above this are skipped.
  double ratio_threshold = 0.5;
  std::size_t candidates_per_token = 5;
  std::size_t number_variants = 3;
  std::size_t max_variants_per_sentence = 75;
  std::size_t neighbor_scan_limit = 50;
  uint64_t seed = 0;

  // Throws Error if a field is out of range.
  void Validate() const;
};

struct SubstitutionCandidate {
  std::string token;
  double similarity = 0.0;
  // 0-based position in the scanned neighbor list; for the first candidate
  // this is the number of neighbors skipped.
  std::size_t rank = 0;
  double ratio = 0.0;
};

struct SelectionResult {
  std::vector<SubstitutionCandidate> candidates;
  bool out_of_vocabulary = false;
};

SelectionResult SelectSubstitutes(const NeighborSource& index,
                                  std::string_view token,
                                  const ManipulationConfig& config);

// True for a non-empty run of digits from one script (ASCII, Arabic-Indic or
// extended Arabic-Indic).
bool IsDigitToken(std::string_view token);

// Random digit string of the same length and script, different from `token`,
// without a leading zero when longer than one digit. nullopt when `token` is
// not a digit token.
std::optional<std::string> SubstituteNumber(std::string_view token, Rng& rng);

enum class ManipulationKind { kEmbeddingSwap, kNumberRandomize, kNegationDelete };

std::string_view KindName(ManipulationKind kind);
// Throws Error for unknown names.
ManipulationKind ParseKind(std::string_view name);

struct ManipulationRecord {
  std::size_t token_index = 0;  // into the source sentence
  std::string original;
  std::string substitute;  // empty for deletions
  std::string pos;
  ManipulationKind kind = ManipulationKind::kEmbeddingSwap;
  std::optional<std::size_t> rank;
  std::optional<double> ratio;

  bool operator==(const ManipulationRecord&) const = default;
};

struct ManipulatedSentence {
  std::string source_id;
  std::vector<Token> tokens;
  std::vector<ManipulationRecord> records;
};

// Replays `records` on `source`. Throws Error if a record does not match the
// token it points at or two records touch the same index.
std::vector<Token> ApplyRecords(const std::vector<Token>& source,
                                const std::vector<ManipulationRecord>& records);

// Throws Error if the token is not NEG_PART or is the only token.
ManipulatedSentence RemoveNegation(const Sentence& sentence,
                                   std::size_t token_index);

// Per-token alternatives for one sentence, in token order.
struct TokenOptions {
  std::size_t token_index = 0;
  std::vector<ManipulationRecord> options;
};

// Builds the option lists used by GenerateVariants. Randomness comes from a
// stream keyed by (config.seed, sentence.id).
std::vector<TokenOptions> BuildTokenOptions(const Sentence& sentence,
                                            const NeighborSource& index,
                                            const ManipulationConfig& config);

// Cartesian product of BuildTokenOptions in lexicographic order of option
// indices (leftmost token most significant), truncated at
// config.max_variants_per_sentence.
std::vector<ManipulatedSentence> GenerateVariants(
    const Sentence& sentence, const NeighborSource& index,
    const ManipulationConfig& config);

}  // namespace manipgen

#endif  // MANIPGEN_MANIPULATE_H_
