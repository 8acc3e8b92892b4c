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

#ifndef EDST_STATE_HPP_
#define EDST_STATE_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace edst {

using Json = nlohmann::ordered_json;

// Label order is significant: argmax ties resolve to the earlier member.
enum class ValueLabel : std::uint8_t { kLike = 0, kDislike = 1, kNotMentioned = 2 };
enum class SlotLabel : std::uint8_t { kDontCare = 0, kMentioned = 1, kNotMentioned = 2 };

inline constexpr std::size_t kNumValueLabels = 3;
inline constexpr std::size_t kNumSlotLabels = 3;

std::string_view to_string(ValueLabel label);
std::string_view to_string(SlotLabel label);
ValueLabel parse_value_label(std::string_view text);
SlotLabel parse_slot_label(std::string_view text);

template <typename V>
using NameMap = std::map<std::string, V, std::less<>>;
using NameSet = std::set<std::string, std::less<>>;

// Slot inventory of a task. Informable slots keep their file order, which
// fixes the order of model heads and serialized arrays.
class Ontology {
 public:
  struct Slot {
    std::string name;
    std::vector<std::string> values;
    bool operator==(const Slot&) const = default;
  };

  Ontology() = default;
  // Throws ValidationError when names repeat, a value list is empty, or a
  // single-value slot is not informable.
  Ontology(std::vector<Slot> informable, std::vector<std::string> requestable,
           NameSet single_value);

  const std::vector<Slot>& informable() const { return informable_; }
  const std::vector<std::string>& requestable() const { return requestable_; }
  const NameSet& single_value() const { return single_value_; }

  const Slot* find_slot(std::string_view name) const;
  // Throws ArgumentError for unknown slots.
  const Slot& slot(std::string_view name) const;
  bool has_value(std::string_view slot, std::string_view value) const;
  bool is_requestable(std::string_view slot) const;
  bool is_single_value(std::string_view slot) const;
  std::size_t num_values() const;

  Json to_json() const;
  static Ontology from_json(const Json& json);
  static Ontology load(const std::string& path);
  void save(const std::string& path) const;
  // Stable 64-bit FNV-1a hash of the canonical JSON, as 16 hex digits.
  std::string fingerprint() const;

  bool operator==(const Ontology& other) const {
    return informable_ == other.informable_ && requestable_ == other.requestable_ &&
           single_value_ == other.single_value_;
  }

 private:
  std::vector<Slot> informable_;
  std::vector<std::string> requestable_;
  NameSet single_value_;
  NameMap<std::size_t> slot_index_;
  NameSet requestable_set_;
};

// A point in the enriched state space: one label per informable slot, one
// per value, and the set of slots the user asked about this turn.
struct StateAssignment {
  NameMap<SlotLabel> slot_labels;
  NameMap<NameMap<ValueLabel>> value_labels;
  NameSet requested;

  SlotLabel slot_label(std::string_view slot) const;
  ValueLabel value_label(std::string_view slot, std::string_view value) const;
  bool operator==(const StateAssignment&) const = default;
};

// Every slot NOT_MENTIONED, every value NOT_MENTIONED, nothing requested.
StateAssignment neutral_assignment(const Ontology& ontology);

// Throws InconsistentAssignment when a slot label disagrees with its value
// labels, a single-value slot has several LIKE values, or the assignment does
// not cover exactly the ontology.
void check_assignment(const StateAssignment& assignment, const Ontology& ontology);

using ValueDist = std::array<double, kNumValueLabels>;  // LIKE, DISLIKE, NOT_MENTIONED
using SlotCond = std::array<double, 2>;                 // DONT_CARE, NOT_MENTIONED

// Factorized belief: per-value marginals p(eta_v) plus, for each slot, the
// conditional p(xi_s | all values NOT_MENTIONED) over {DONT_CARE, NOT_MENTIONED}.
struct BeliefState {
  NameMap<NameMap<ValueDist>> value_dists;
  NameMap<SlotCond> slot_conds;

  const ValueDist& value(std::string_view slot, std::string_view value) const;
  const SlotCond& slot_cond(std::string_view slot) const;
  bool operator==(const BeliefState&) const = default;
};

BeliefState new_belief_state(const Ontology& ontology);

// Throws ArgumentError unless every distribution is non-negative and sums to
// one within 1e-9.
void check_belief(const BeliefState& belief);

// Marginal p(xi_s) over (DONT_CARE, MENTIONED, NOT_MENTIONED) implied by the
// factorization: MENTIONED iff some value is labelled.
std::array<double, kNumSlotLabels> slot_label_marginal(const BeliefState& belief,
                                                       std::string_view slot);

enum class SlotConstraint { kForcedMentioned, kFree };

SlotConstraint slot_label_constraint(const NameMap<ValueLabel>& value_labels);

// prod_s p(xi_s | eta^s) prod_v p(eta_v).
double joint_probability(const BeliefState& belief, const StateAssignment& assignment);

// Per-value argmax, slot labels from the constraint (free branch by argmax),
// and single-value slots reduced to their most probable LIKE value.
StateAssignment map_assignment(const BeliefState& belief, const Ontology& ontology);

// Substitutes each previous value label by the turn label unless the turn
// says NOT_MENTIONED. Requests are per turn and come from `turn`.
StateAssignment accumulate_turn(const StateAssignment& prev, const StateAssignment& turn);

// As above, plus single-value handling: a LIKE in the turn demotes the
// slot's other LIKE values, and a turn-level DONT_CARE with no labelled values
// clears the slot. Keeps at most one LIKE per single-value slot.
StateAssignment accumulate_turn(const StateAssignment& prev, const StateAssignment& turn,
                                const Ontology& ontology);

// System dialog acts.
enum class Polarity : std::uint8_t { kLike, kDislike };

struct DialogAct {
  enum class Kind : std::uint8_t { kRequest, kConfirm, kConfirmDontCare, kInform };

  Kind kind = Kind::kRequest;
  std::string slot;
  std::string value;  // confirm and inform only
  Polarity polarity = Polarity::kLike;  // confirm only

  static DialogAct request(std::string slot);
  static DialogAct confirm(std::string slot, std::string value, Polarity polarity);
  static DialogAct confirm_dontcare(std::string slot);
  static DialogAct inform(std::string slot, std::string value);

  bool operator==(const DialogAct&) const = default;
};

using SystemAct = std::vector<DialogAct>;

// Throws ValidationError naming the first act that refers to a slot or value
// outside the ontology. inform() on a requestable-only slot may carry any
// value, since those slots have no value vocabulary.
void check_system_act(const SystemAct& act, const Ontology& ontology);

Json to_json(const DialogAct& act);
DialogAct dialog_act_from_json(const Json& json);

}  // namespace edst

#endif  // EDST_STATE_HPP_
