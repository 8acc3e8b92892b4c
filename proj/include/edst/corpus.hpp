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

#ifndef EDST_CORPUS_HPP_
#define EDST_CORPUS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edst/features.hpp"
#include "edst/neural.hpp"
#include "edst/state.hpp"
#include "edst/tracker.hpp"

namespace edst {

struct Turn {
  SystemAct system_acts;
  Utterance user;
  std::optional<std::vector<AsrHypothesis>> asr;
  // Both assignments cover the whole ontology; their `requested` sets mirror
  // requested_gold.
  std::optional<StateAssignment> gold_turn;
  std::optional<StateAssignment> gold_state;
  NameSet requested_gold;

  bool operator==(const Turn&) const = default;
};

struct Dialog {
  std::string id;
  std::vector<Turn> turns;
  bool operator==(const Dialog&) const = default;
};

// Corpus file: {"dialogs": [...]}. A turn-level slot entry may be the string
// "dont_care" instead of a value map. Throws FormatError (with dialog id and
// turn index) on schema violations and ValidationError on names outside the
// ontology.
std::vector<Dialog> corpus_from_json(const Json& json, const Ontology& ontology);
Json corpus_to_json(const std::vector<Dialog>& dialogs);
std::vector<Dialog> load_corpus(const std::string& path, const Ontology& ontology);
void save_corpus(const std::vector<Dialog>& dialogs, const std::string& path);

Turn turn_from_json(const Json& json, const Ontology& ontology);
Json turn_to_json(const Turn& turn);

TurnInput to_turn_input(const Turn& turn);

// Accumulated gold per turn: gold_state where given, otherwise the running
// accumulation of gold_turn. Throws DataError when a turn has neither.
std::vector<StateAssignment> gold_states(const Dialog& dialog, const Ontology& ontology);
// Turn-level gold per turn. Throws DataError when a turn lacks it.
std::vector<StateAssignment> gold_turns(const Dialog& dialog);

enum class ExampleKind : std::uint8_t { kValue, kSlot, kRequest };

// One supervised head input. `turn` points into the corpus it came from,
// which must outlive the example.
struct TrainingExample {
  ExampleKind kind = ExampleKind::kValue;
  std::string slot;
  std::string value;            // value examples only
  const Turn* turn = nullptr;
  std::vector<double> belief;   // one-hot previous gold; empty in turn-level mode
  std::size_t gold = 0;
};

// Class indices: value heads (LIKE, DISLIKE, NOT_MENTIONED) or (MENTIONED,
// NOT_MENTIONED); slot heads (DONT_CARE, NOT_MENTIONED); request heads
// (requested, not requested).
std::size_t value_class(ValueLabel label, LabelScheme scheme);
std::size_t num_value_classes(LabelScheme scheme);

// Per turn: a value example for every (slot, value), a slot example for each
// slot whose gold values are all NOT_MENTIONED, a request example for each
// requestable slot. Gold is the accumulated state with use_prev_belief, the
// turn-level labels otherwise. Throws DataError when that gold is missing.
std::vector<TrainingExample> decompose(const Dialog& dialog, const Ontology& ontology,
                                       const TrackerMode& mode);

struct SamplerConfig {
  std::size_t batch_size = 256;
  std::vector<double> ratios;  // one per class
};

// Largest-remainder apportionment of `total` by `ratios`; leftover units go
// to the largest fractional parts, ties to the larger ratio, then the
// earlier class. Zero ratios get nothing.
std::vector<std::size_t> apportion(std::size_t total, std::span<const double> ratios);

// Ratio-controlled minibatches over example labels. Classes with a positive
// ratio but no examples are dropped when `drop_empty`; otherwise they raise
// SamplingError.
class MinibatchSampler {
 public:
  MinibatchSampler(std::vector<std::size_t> labels, SamplerConfig config, bool drop_empty = false);

  // Example indices, grouped by class. Classes with fewer examples than their
  // quota are drawn with replacement, others without.
  std::vector<std::size_t> sample(Rng& rng) const;

  const std::vector<std::size_t>& class_counts() const { return counts_; }
  std::size_t size() const { return total_; }

 private:
  std::vector<std::vector<std::size_t>> by_class_;
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

struct CorpusSplit {
  std::vector<Dialog> train, valid, test;
};

// Dialog-level seeded split; sizes by apportion(). Throws ArgumentError for
// fewer than five dialogs.
CorpusSplit split_corpus(const std::vector<Dialog>& dialogs, std::array<double, 3> ratio,
                         std::uint64_t seed);

struct SyntheticData {
  Ontology ontology;
  SemanticDictionary dictionary;
  EmbeddingTable embeddings;
  std::vector<Dialog> dialogs;
};

struct SyntheticConfig {
  std::size_t dialogs = 200;
  std::size_t min_turns = 3;
  std::size_t max_turns = 6;
  std::size_t embedding_dim = 25;
};

// Small movie-search domain: 3 informable slots with 4 values each, 2
// requestable slots, a synonym dictionary, embeddings in which synonyms sit
// near their canonical word, and dialogs with turn and accumulated gold.
SyntheticData generate_synthetic(const SyntheticConfig& config, std::uint64_t seed);

}  // namespace edst

#endif  // EDST_CORPUS_HPP_
