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

// Word vectors in the fastText `.vec` text layout and exact cosine k-NN.

#ifndef MANIPGEN_EMBEDDINGS_H_
#define MANIPGEN_EMBEDDINGS_H_

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace manipgen {

struct Neighbor {
  std::string token;
  double similarity = 0.0;

  bool operator==(const Neighbor&) const = default;
};

// Similarity descending, then token ascending (byte order).
bool NeighborBefore(const Neighbor& a, const Neighbor& b);

// Anything that can list the nearest tokens of a vocabulary item.
class NeighborSource {
 public:
  virtual ~NeighborSource() = default;

  virtual bool Contains(std::string_view token) const = 0;

  // Up to k neighbors of `token`, excluding the token itself, in
  // NeighborBefore order. Throws OutOfVocabularyError for unknown tokens.
  virtual std::vector<Neighbor> Nearest(std::string_view token,
                                        std::size_t k) const = 0;
};

// dot(a, b) / (|a| |b|), clamped to [-1, 1]. Throws Error on dimension
// mismatch or a zero-norm argument.
double Cosine(std::span<const float> a, std::span<const float> b);

class EmbeddingIndex final : public NeighborSource {
 public:
  enum class ScanMode {
    kFullSort,  // score every row, sort everything
    kTopK,      // score every row, keep a bounded top-k
  };

  // Throws Error if rows are ragged, non-finite or tokens repeat.
  EmbeddingIndex(std::size_t dim, std::vector<std::string> vocab,
                 std::vector<float> matrix);

  // Reads the `.vec` layout. Duplicate tokens keep the first row and add a
  // message to `warnings` (if given). Tokens are NFC-normalized.
  static EmbeddingIndex Parse(std::istream& in,
                              std::vector<std::string>* warnings = nullptr);
  static EmbeddingIndex Load(const std::string& path,
                             std::vector<std::string>* warnings = nullptr);

  // Writes the `.vec` layout with enough digits to reload identical floats.
  void Save(std::ostream& out) const;

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vocab_.size(); }
  const std::vector<std::string>& vocab() const { return vocab_; }

  bool Contains(std::string_view token) const override;

  // Row of `token`; throws OutOfVocabularyError.
  std::span<const float> Vector(std::string_view token) const;

  std::vector<Neighbor> Nearest(std::string_view token,
                                std::size_t k) const override {
    return Nearest(token, k, ScanMode::kTopK);
  }

  // Both modes score rows with the same arithmetic and return identical
  // results. Rows with zero norm are never returned.
  std::vector<Neighbor> Nearest(std::string_view token, std::size_t k,
                                ScanMode mode) const;

  bool operator==(const EmbeddingIndex& other) const {
    return dim_ == other.dim_ && vocab_ == other.vocab_ &&
           matrix_ == other.matrix_;
  }

 private:
  std::size_t RowOf(std::string_view token) const;
  std::span<const float> Row(std::size_t i) const {
    return {matrix_.data() + i * dim_, dim_};
  }

  std::size_t dim_;
  std::vector<std::string> vocab_;
  std::vector<float> matrix_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> row_of_;
};

// k_nearest: top-k neighbors of an in-vocabulary token.
inline std::vector<Neighbor> KNearest(const NeighborSource& index,
                                      std::string_view token, std::size_t k) {
  return index.Nearest(token, k);
}

// Fixed neighbor lists, for replaying published neighbor rankings or tests.
class NeighborTable final : public NeighborSource {
 public:
  // Lists must already be in rank order; they are returned as given.
  void Set(std::string token, std::vector<Neighbor> neighbors);

  bool Contains(std::string_view token) const override;
  std::vector<Neighbor> Nearest(std::string_view token,
                                std::size_t k) const override;

 private:
  std::unordered_map<std::string, std::vector<Neighbor>> lists_;
};

}  // namespace manipgen

#endif  // MANIPGEN_EMBEDDINGS_H_
