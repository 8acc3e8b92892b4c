// Copyright 2026 The EDST Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EDST_FEATURES_HPP_
#define EDST_FEATURES_HPP_

#include <array>
#include <cstddef>
#include <istream>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "edst/matrix.hpp"
#include "edst/state.hpp"

namespace edst {

// Word vectors keyed by normalized token. Unknown tokens embed to zero.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = 0);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return tokens_.size(); }

  // Returns false (and keeps the existing entry) for a duplicate token.
  bool insert(std::string_view token, std::span<const double> vector);
  bool contains(std::string_view token) const;
  std::span<const double> lookup(std::string_view token) const;

  const std::vector<std::string>& tokens() const { return tokens_; }
  // FNV-1a over the dimension, tokens and raw vector bytes.
  std::string fingerprint() const;

 private:
  std::size_t dim_;
  std::vector<std::string> tokens_;
  std::vector<double> storage_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> zeros_;
};

// Reads `token v1 ... vd` lines. Throws FormatError on an empty stream or a
// line whose width differs from the first one.
EmbeddingTable load_embeddings(std::istream& in);
EmbeddingTable load_embeddings_file(const std::string& path);
void write_embeddings(std::ostream& out, const EmbeddingTable& table);

struct Utterance {
  std::vector<std::string> tokens;
  bool operator==(const Utterance&) const = default;
};

// Hand-written synonym lists: entity name -> token sequences.
class SemanticDictionary {
 public:
  SemanticDictionary() = default;

  void add(std::string_view entity, std::vector<std::string> synonym);
  // Normalized synonym sequences for the entity, or an empty list.
  const std::vector<std::vector<std::string>>& synonyms(std::string_view entity) const;
  bool empty() const { return entries_.empty(); }

  // Throws ValidationError if a key names neither a slot nor a value.
  void check(const Ontology& ontology) const;

  Json to_json() const;
  static SemanticDictionary from_json(const Json& json);
  static SemanticDictionary load(const std::string& path);

  bool operator==(const SemanticDictionary&) const = default;

 private:
  // Keyed by the entity name as written; lookups normalize.
  std::map<std::string, std::vector<std::vector<std::string>>> entries_;
  std::map<std::string, std::vector<std::vector<std::string>>> normalized_;
};

struct DotMatchParams {
  double w1 = 1.0;
  double b1 = 0.0;
};

// Mean of the token vectors of a (possibly multi-token) entity name; OOV
// tokens count as zero vectors. Throws ArgumentError for an empty name.
std::vector<double> embed_entity(const EmbeddingTable& table,
                                 const std::vector<std::string>& name_tokens);

enum class LabelScheme : std::uint8_t { kEnriched3, kMention2 };

// f1 for a value: its previous-turn label distribution, 3-dim in the
// enriched scheme and (MENTIONED, NOT_MENTIONED) in the two-label scheme.
std::vector<double> value_belief_vector(const BeliefState& belief, std::string_view slot,
                                        std::string_view value, LabelScheme scheme);

// f1 for a slot: previous marginal over (DONT_CARE, MENTIONED, NOT_MENTIONED).
std::vector<double> slot_belief_vector(const BeliefState& belief, std::string_view slot);

using ActVector = std::array<double, 6>;

// f2 for value v of slot s: (request s, confirm v like, confirm v dislike,
// confirm another value of s, inform v, none of these).
ActVector act_feature_vector(std::string_view slot, std::string_view value, const SystemAct& act);

// Slot-level f2: (request s, any like-confirm in s, any dislike-confirm in s,
// confirm dontcare s, any inform in s, none of these).
ActVector slot_act_feature_vector(std::string_view slot, const SystemAct& act);

// 1 at every token covered by a contiguous occurrence of the entity's own
// name or of one of its dictionary synonyms.
std::vector<double> string_match_vector(std::string_view entity, const Utterance& utterance,
                                        const SemanticDictionary* dictionary);

// Raw dot products X_i . e(v) for every token.
std::vector<double> dot_products(std::span<const double> entity_embedding,
                                 const Utterance& utterance, const EmbeddingTable& table);

// sigmoid(w1 * (X_i . e(v)) + b1) for every token.
std::vector<double> dot_match_vector(std::string_view entity, const Utterance& utterance,
                                     const EmbeddingTable& table, const DotMatchParams& params);

// Rows of the value-specific matrix; at least three so every convolution
// window size fits.
inline std::size_t feature_rows(std::size_t tokens) { return tokens < 3 ? 3 : tokens; }

// X | x_dot | x_str, zero-padded to three rows.
Matrix value_specific_matrix(std::string_view entity, const Utterance& utterance,
                             const EmbeddingTable& table, const DotMatchParams& params,
                             const SemanticDictionary* dictionary);

// Word-embedding matrix X of an utterance, padded to feature_rows() rows.
Matrix word_matrix(const Utterance& utterance, const EmbeddingTable& table);

// Everything a tracker head reads for one (entity, turn) pair. The x_dot
// column is kept as raw dot products so w1 and b1 stay differentiable.
struct FeatureInput {
  std::size_t tokens = 0;                     // k_u; rows beyond it are padding
  std::shared_ptr<const Matrix> words;        // feature_rows(k_u) x d
  std::vector<double> dots;                   // per row, 0 on padding
  std::vector<double> string_match;           // per row, 0 on padding
  std::vector<double> belief;                 // f1; empty when unused
  ActVector acts{0, 0, 0, 0, 0, 1};           // f2
};

// Shared per-utterance pieces so that features for many entities over the
// same utterance reuse one embedding matrix.
class UtteranceFeatures {
 public:
  UtteranceFeatures(const Utterance& utterance, const EmbeddingTable& table);

  // Fills tokens, words, dots and string_match for the entity.
  FeatureInput for_entity(std::string_view entity, const SemanticDictionary* dictionary,
                          const EmbeddingTable& table) const;

  const Utterance& utterance() const { return utterance_; }

 private:
  Utterance utterance_;
  std::vector<std::string> normalized_;
  std::shared_ptr<const Matrix> words_;
};

}  // namespace edst

#endif  // EDST_FEATURES_HPP_
