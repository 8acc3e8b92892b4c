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

#ifndef EDST_TRACKER_HPP_
#define EDST_TRACKER_HPP_

#include <cstddef>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edst/features.hpp"
#include "edst/head.hpp"
#include "edst/state.hpp"

namespace edst {

struct TrackerMode {
  LabelScheme labels = LabelScheme::kEnriched3;
  // Jordan-style input of the previous belief; off for turn-level labels.
  bool use_prev_belief = true;
  // Feed the plain word matrix instead of the value-specific one.
  bool ablate_value_specific = false;

  bool operator==(const TrackerMode&) const = default;
};

std::string_view to_string(LabelScheme scheme);
LabelScheme parse_label_scheme(std::string_view text);

struct AsrHypothesis {
  Utterance utterance;
  double score = 0.0;
  bool operator==(const AsrHypothesis&) const = default;
};

struct TurnInput {
  Utterance user;
  SystemAct system_act;
  std::optional<std::vector<AsrHypothesis>> asr;
  bool operator==(const TurnInput&) const = default;
};

// All learned parameters: a value head and a slot head per informable slot
// and a head per requestable slot, plus the feature resources they read.
class TrackerModel {
 public:
  // Parameters start at zero (w1 = 1, b1 = 0); call initialize() to draw them.
  TrackerModel(Ontology ontology, std::shared_ptr<const EmbeddingTable> embeddings,
               std::optional<SemanticDictionary> dictionary, TrackerMode mode,
               std::size_t filters = 50);

  void initialize(Rng& rng);

  const Ontology& ontology() const { return ontology_; }
  const EmbeddingTable& embeddings() const { return *embeddings_; }
  std::shared_ptr<const EmbeddingTable> embeddings_ptr() const { return embeddings_; }
  const SemanticDictionary* dictionary() const { return dictionary_ ? &*dictionary_ : nullptr; }
  const TrackerMode& mode() const { return mode_; }
  std::size_t filters() const { return filters_; }

  HeadConfig value_config() const;
  HeadConfig slot_config() const;
  HeadConfig request_config() const;

  HeadParams& value_head(std::string_view slot);
  const HeadParams& value_head(std::string_view slot) const;
  HeadParams& slot_head(std::string_view slot);
  const HeadParams& slot_head(std::string_view slot) const;
  HeadParams& request_head(std::string_view slot);
  const HeadParams& request_head(std::string_view slot) const;

  // Feature inputs. `belief` is f1 and must be empty unless use_prev_belief.
  FeatureInput value_input(const UtteranceFeatures& utterance, std::string_view slot,
                           std::string_view value, const SystemAct& act,
                           std::vector<double> belief) const;
  FeatureInput slot_input(const UtteranceFeatures& utterance, std::string_view slot,
                          const SystemAct& act, std::vector<double> belief) const;
  FeatureInput request_input(const UtteranceFeatures& utterance, std::string_view slot) const;

  // Number of value classes: 3 enriched, 2 for MENTIONED/NOT_MENTIONED.
  std::size_t value_classes() const;

 private:
  std::size_t informable_index(std::string_view slot) const;
  std::size_t requestable_index(std::string_view slot) const;

  Ontology ontology_;
  std::shared_ptr<const EmbeddingTable> embeddings_;
  std::optional<SemanticDictionary> dictionary_;
  TrackerMode mode_;
  std::size_t filters_;
  std::vector<HeadParams> value_heads_;
  std::vector<HeadParams> slot_heads_;
  std::vector<HeadParams> request_heads_;
};

// Maps a value-head output onto (LIKE, DISLIKE, NOT_MENTIONED); the two-label
// scheme stores MENTIONED in the LIKE slot.
ValueDist to_value_dist(std::span<const double> probs, LabelScheme scheme);

// p(eta_v) for one value. Throws ArgumentError for unknown slots or values.
ValueDist vst_update(const TrackerModel& model, std::string_view slot, std::string_view value,
                     const TurnInput& turn, const BeliefState& belief);

// Free-branch network output over (DONT_CARE, NOT_MENTIONED).
SlotCond sst_free_branch(const TrackerModel& model, std::string_view slot, const TurnInput& turn,
                         const BeliefState& belief);

// p(xi_s | eta^s) over (DONT_CARE, MENTIONED, NOT_MENTIONED): MENTIONED with
// certainty when any value is labelled, otherwise the free branch.
std::array<double, kNumSlotLabels> sst_update(const TrackerModel& model, std::string_view slot,
                                              const TurnInput& turn, const BeliefState& belief,
                                              const NameMap<ValueLabel>& eta_map);

// Probability that the user requests `slot` in this utterance.
double requestable_update(const TrackerModel& model, std::string_view slot,
                          const Utterance& utterance);

struct TurnResult {
  BeliefState belief;
  NameMap<double> requested;

  // MAP assignment with requested = {slots with probability >= 0.5}.
  StateAssignment decode(const Ontology& ontology) const;
  bool operator==(const TurnResult&) const = default;
};

TurnResult track_turn(const TrackerModel& model, const TurnInput& turn, const BeliefState& belief);

// Mixes per-hypothesis results with normalized ASR posteriors. Throws
// ArgumentError without hypotheses or when all scores are zero.
TurnResult track_turn_asr(const TrackerModel& model, const TurnInput& turn,
                          const BeliefState& belief);

struct DialogTrace {
  std::vector<StateAssignment> turn_predictions;  // turn-level mode only
  std::vector<StateAssignment> states;            // accumulated
};

// Threads the belief across turns (use_prev_belief) or decodes each turn from
// the neutral prior and accumulates. With use_asr, turns that carry an N-best
// list go through track_turn_asr.
DialogTrace track_dialog_trace(const TrackerModel& model, std::span<const TurnInput> turns,
                               bool use_asr = false);
std::vector<StateAssignment> track_dialog(const TrackerModel& model,
                                          std::span<const TurnInput> turns, bool use_asr = false);

struct SlotDecision {
  enum class Kind { kValue, kDontCare, kNone };
  Kind kind = Kind::kNone;
  std::string value;
  bool operator==(const SlotDecision&) const = default;
};

// Two-label decoding for single-valued slots: MAP-MENTIONED values compete on
// p(MENTIONED); with none, the free branch picks DONTCARE or NONE.
SlotDecision single_value_decode(const std::vector<std::pair<std::string, double>>& mentioned,
                                 const SlotCond& free_branch);

// Binary model file: magic line, one-line JSON manifest, then the named
// arrays as little-endian float64 in manifest order.
void save_model(const TrackerModel& model, std::ostream& out);
void save_model_file(const TrackerModel& model, const std::string& path);
// Throws FormatError on a malformed file or when `embeddings` differ from the
// table the model was trained with.
TrackerModel load_model(std::istream& in, std::shared_ptr<const EmbeddingTable> embeddings);
TrackerModel load_model_file(const std::string& path,
                             std::shared_ptr<const EmbeddingTable> embeddings);

}  // namespace edst

#endif  // EDST_TRACKER_HPP_
