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

#include "edst/features.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>

#include "edst/error.hpp"
#include "edst/text.hpp"

namespace edst {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string entity_key(std::string_view entity) {
  std::string key;
  for (const auto& t : entity_tokens(entity)) {
    if (!key.empty()) key.push_back(' ');
    key += t;
  }
  return key;
}

// Marks positions covered by occurrences of `pattern` in `tokens`.
void mark_occurrences(const std::vector<std::string>& tokens,
                      const std::vector<std::string>& pattern, std::vector<double>& marks) {
  if (pattern.empty() || pattern.size() > tokens.size()) return;
  for (std::size_t start = 0; start + pattern.size() <= tokens.size(); ++start) {
    bool match = true;
    for (std::size_t j = 0; j < pattern.size(); ++j) {
      if (tokens[start + j] != pattern[j]) {
        match = false;
        break;
      }
    }
    if (match) {
      for (std::size_t j = 0; j < pattern.size(); ++j) marks[start + j] = 1.0;
    }
  }
}

const std::vector<std::vector<std::string>> kNoSynonyms;

std::vector<double> match_normalized(std::string_view entity,
                                     const std::vector<std::string>& tokens,
                                     const SemanticDictionary* dictionary) {
  std::vector<double> marks(tokens.size(), 0.0);
  mark_occurrences(tokens, entity_tokens(entity), marks);
  if (dictionary != nullptr) {
    for (const auto& synonym : dictionary->synonyms(entity)) mark_occurrences(tokens, synonym, marks);
  }
  return marks;
}

}  // namespace

// ---------------------------------------------------------------------------
// EmbeddingTable

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim), zeros_(dim, 0.0) {}

bool EmbeddingTable::insert(std::string_view token, std::span<const double> vector) {
  if (vector.size() != dim_) {
    throw ShapeError("embedding of '" + std::string(token) + "' has " +
                     std::to_string(vector.size()) + " components, expected " +
                     std::to_string(dim_));
  }
  std::string key = normalize_token(token);
  if (index_.contains(key)) return false;
  index_.emplace(key, tokens_.size());
  tokens_.push_back(std::move(key));
  storage_.insert(storage_.end(), vector.begin(), vector.end());
  return true;
}

bool EmbeddingTable::contains(std::string_view token) const {
  return index_.contains(normalize_token(token));
}

std::span<const double> EmbeddingTable::lookup(std::string_view token) const {
  auto it = index_.find(normalize_token(token));
  if (it == index_.end()) return zeros_;
  return {storage_.data() + it->second * dim_, dim_};
}

std::string EmbeddingTable::fingerprint() const {
  std::string bytes = std::to_string(dim_);
  for (const auto& t : tokens_) {
    bytes.push_back('\n');
    bytes += t;
  }
  bytes.append(reinterpret_cast<const char*>(storage_.data()), storage_.size() * sizeof(double));
  return fnv1a_hex(bytes);
}

EmbeddingTable load_embeddings(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<EmbeddingTable> table;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    values.clear();
    std::string number;
    while (fields >> number) {
      char* end = nullptr;
      const double x = std::strtod(number.c_str(), &end);
      if (end == number.c_str() || *end != '\0') {
        throw FormatError("embeddings line " + std::to_string(line_no) + ": bad number '" +
                          number + "'");
      }
      values.push_back(x);
    }
    if (values.empty()) {
      throw FormatError("embeddings line " + std::to_string(line_no) + ": no vector components");
    }
    if (!table) table.emplace(values.size());
    if (values.size() != table->dim()) {
      throw FormatError("embeddings line " + std::to_string(line_no) + ": " +
                        std::to_string(values.size()) + " components, expected " +
                        std::to_string(table->dim()));
    }
    table->insert(token, values);
  }
  if (!table) throw FormatError("embeddings: empty input");
  return std::move(*table);
}

EmbeddingTable load_embeddings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open embeddings file " + path);
  return load_embeddings(in);
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  char buf[32];
  for (const auto& token : table.tokens()) {
    out << token;
    for (double x : table.lookup(token)) {
      std::snprintf(buf, sizeof(buf), " %.17g", x);
      out << buf;
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// SemanticDictionary

void SemanticDictionary::add(std::string_view entity, std::vector<std::string> synonym) {
  if (synonym.empty()) return;
  for (const auto& t : synonym) {
    if (t.empty()) throw FormatError("empty token in synonym of '" + std::string(entity) + "'");
  }
  normalized_[entity_key(entity)].push_back(normalize_tokens(synonym));
  entries_[std::string(entity)].push_back(std::move(synonym));
}

const std::vector<std::vector<std::string>>& SemanticDictionary::synonyms(
    std::string_view entity) const {
  auto it = normalized_.find(entity_key(entity));
  return it == normalized_.end() ? kNoSynonyms : it->second;
}

void SemanticDictionary::check(const Ontology& ontology) const {
  NameSet names;
  for (const auto& s : ontology.informable()) {
    names.insert(s.name);
    for (const auto& v : s.values) names.insert(v);
  }
  for (const auto& r : ontology.requestable()) names.insert(r);
  for (const auto& [entity, synonyms] : entries_) {
    if (!names.contains(entity)) {
      throw ValidationError("dictionary entry '" + entity + "' names no ontology slot or value");
    }
  }
}

Json SemanticDictionary::to_json() const {
  Json out = Json::object();
  for (const auto& [entity, synonyms] : entries_) out[entity] = synonyms;
  return out;
}

SemanticDictionary SemanticDictionary::from_json(const Json& json) {
  if (!json.is_object()) throw FormatError("dictionary must be an object");
  SemanticDictionary dict;
  for (const auto& [entity, lists] : json.items()) {
    if (!lists.is_array()) throw FormatError("dictionary entry '" + entity + "' must be a list");
    // Registered even when empty so that save/load keeps the key.
    dict.entries_[entity];
    for (const auto& seq : lists) {
      if (!seq.is_array() || seq.empty()) {
        throw FormatError("dictionary entry '" + entity + "' needs non-empty token lists");
      }
      std::vector<std::string> tokens;
      for (const auto& t : seq) {
        if (!t.is_string()) throw FormatError("dictionary entry '" + entity + "' has a non-string token");
        tokens.push_back(t.get<std::string>());
      }
      dict.add(entity, std::move(tokens));
    }
  }
  return dict;
}

SemanticDictionary SemanticDictionary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open dictionary file " + path);
  try {
    return from_json(Json::parse(in));
  } catch (const Json::parse_error& e) {
    throw FormatError("dictionary " + path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Feature functions

std::vector<double> embed_entity(const EmbeddingTable& table,
                                 const std::vector<std::string>& name_tokens) {
  if (name_tokens.empty()) throw ArgumentError("cannot embed an empty entity name");
  std::vector<double> mean(table.dim(), 0.0);
  for (const auto& t : name_tokens) {
    auto v = table.lookup(t);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += v[i];
  }
  const double n = static_cast<double>(name_tokens.size());
  for (double& x : mean) x /= n;
  return mean;
}

std::vector<double> value_belief_vector(const BeliefState& belief, std::string_view slot,
                                        std::string_view value, LabelScheme scheme) {
  const ValueDist& p = belief.value(slot, value);
  if (scheme == LabelScheme::kMention2) return {p[0] + p[1], p[2]};
  return {p[0], p[1], p[2]};
}

std::vector<double> slot_belief_vector(const BeliefState& belief, std::string_view slot) {
  const auto m = slot_label_marginal(belief, slot);
  return {m[0], m[1], m[2]};
}

ActVector act_feature_vector(std::string_view slot, std::string_view value, const SystemAct& act) {
  ActVector f{0, 0, 0, 0, 0, 0};
  for (const auto& a : act) {
    if (a.slot != slot) continue;
    switch (a.kind) {
      case DialogAct::Kind::kRequest:
        f[0] = 1;
        break;
      case DialogAct::Kind::kConfirm:
        if (a.value == value) {
          f[a.polarity == Polarity::kLike ? 1 : 2] = 1;
        } else {
          f[3] = 1;
        }
        break;
      case DialogAct::Kind::kInform:
        if (a.value == value) f[4] = 1;
        break;
      case DialogAct::Kind::kConfirmDontCare:
        break;
    }
  }
  f[5] = (f[0] + f[1] + f[2] + f[3] + f[4]) == 0 ? 1 : 0;
  return f;
}

ActVector slot_act_feature_vector(std::string_view slot, const SystemAct& act) {
  ActVector f{0, 0, 0, 0, 0, 0};
  for (const auto& a : act) {
    if (a.slot != slot) continue;
    switch (a.kind) {
      case DialogAct::Kind::kRequest:
        f[0] = 1;
        break;
      case DialogAct::Kind::kConfirm:
        f[a.polarity == Polarity::kLike ? 1 : 2] = 1;
        break;
      case DialogAct::Kind::kConfirmDontCare:
        f[3] = 1;
        break;
      case DialogAct::Kind::kInform:
        f[4] = 1;
        break;
    }
  }
  f[5] = (f[0] + f[1] + f[2] + f[3] + f[4]) == 0 ? 1 : 0;
  return f;
}

std::vector<double> string_match_vector(std::string_view entity, const Utterance& utterance,
                                        const SemanticDictionary* dictionary) {
  return match_normalized(entity, normalize_tokens(utterance.tokens), dictionary);
}

std::vector<double> dot_products(std::span<const double> entity_embedding,
                                 const Utterance& utterance, const EmbeddingTable& table) {
  std::vector<double> dots;
  dots.reserve(utterance.tokens.size());
  for (const auto& t : utterance.tokens) {
    auto x = table.lookup(t);
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d += x[i] * entity_embedding[i];
    dots.push_back(d);
  }
  return dots;
}

std::vector<double> dot_match_vector(std::string_view entity, const Utterance& utterance,
                                     const EmbeddingTable& table, const DotMatchParams& params) {
  const auto e = embed_entity(table, entity_tokens(entity));
  auto dots = dot_products(e, utterance, table);
  for (double& d : dots) d = sigmoid(params.w1 * d + params.b1);
  return dots;
}

Matrix word_matrix(const Utterance& utterance, const EmbeddingTable& table) {
  Matrix x(feature_rows(utterance.tokens.size()), table.dim());
  for (std::size_t i = 0; i < utterance.tokens.size(); ++i) {
    auto v = table.lookup(utterance.tokens[i]);
    std::copy(v.begin(), v.end(), x.row(i).begin());
  }
  return x;
}

Matrix value_specific_matrix(std::string_view entity, const Utterance& utterance,
                             const EmbeddingTable& table, const DotMatchParams& params,
                             const SemanticDictionary* dictionary) {
  const std::size_t d = table.dim();
  const Matrix x = word_matrix(utterance, table);
  const auto dot = dot_match_vector(entity, utterance, table, params);
  const auto str = string_match_vector(entity, utterance, dictionary);
  Matrix m(x.rows, d + 2);
  for (std::size_t i = 0; i < x.rows; ++i) {
    std::copy(x.row(i).begin(), x.row(i).end(), m.row(i).begin());
    if (i < utterance.tokens.size()) {
      m(i, d) = dot[i];
      m(i, d + 1) = str[i];
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// UtteranceFeatures

UtteranceFeatures::UtteranceFeatures(const Utterance& utterance, const EmbeddingTable& table)
    : utterance_(utterance),
      normalized_(normalize_tokens(utterance.tokens)),
      words_(std::make_shared<const Matrix>(word_matrix(utterance, table))) {}

FeatureInput UtteranceFeatures::for_entity(std::string_view entity,
                                           const SemanticDictionary* dictionary,
                                           const EmbeddingTable& table) const {
  FeatureInput in;
  in.tokens = utterance_.tokens.size();
  in.words = words_;
  const std::size_t rows = words_->rows;
  const auto e = embed_entity(table, entity_tokens(entity));
  in.dots.assign(rows, 0.0);
  for (std::size_t i = 0; i < in.tokens; ++i) {
    auto x = words_->row(i);
    double d = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) d += x[j] * e[j];
    in.dots[i] = d;
  }
  in.string_match = match_normalized(entity, normalized_, dictionary);
  in.string_match.resize(rows, 0.0);
  return in;
}

}  // namespace edst
