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

#include "edst/state.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "edst/error.hpp"
#include "edst/text.hpp"

namespace edst {

namespace {

constexpr double kNormTolerance = 1e-9;

template <std::size_t N>
std::size_t argmax(const std::array<double, N>& p) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < N; ++i) {
    if (p[i] > p[best]) best = i;
  }
  return best;
}

template <std::size_t N>
void check_distribution(const std::array<double, N>& p, const std::string& what) {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0)) throw ArgumentError("negative or NaN probability in " + what);
    sum += x;
  }
  if (std::abs(sum - 1.0) > kNormTolerance) {
    throw ArgumentError("distribution for " + what + " sums to " + std::to_string(sum));
  }
}

}  // namespace

std::string_view to_string(ValueLabel label) {
  switch (label) {
    case ValueLabel::kLike:
      return "like";
    case ValueLabel::kDislike:
      return "dislike";
    case ValueLabel::kNotMentioned:
      return "not_mentioned";
  }
  return "not_mentioned";
}

std::string_view to_string(SlotLabel label) {
  switch (label) {
    case SlotLabel::kDontCare:
      return "dont_care";
    case SlotLabel::kMentioned:
      return "mentioned";
    case SlotLabel::kNotMentioned:
      return "not_mentioned";
  }
  return "not_mentioned";
}

ValueLabel parse_value_label(std::string_view text) {
  if (text == "like") return ValueLabel::kLike;
  if (text == "dislike") return ValueLabel::kDislike;
  if (text == "not_mentioned") return ValueLabel::kNotMentioned;
  throw FormatError("unknown value label '" + std::string(text) + "'");
}

SlotLabel parse_slot_label(std::string_view text) {
  if (text == "dont_care") return SlotLabel::kDontCare;
  if (text == "mentioned") return SlotLabel::kMentioned;
  if (text == "not_mentioned") return SlotLabel::kNotMentioned;
  throw FormatError("unknown slot label '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Ontology

Ontology::Ontology(std::vector<Slot> informable, std::vector<std::string> requestable,
                   NameSet single_value)
    : informable_(std::move(informable)),
      requestable_(std::move(requestable)),
      single_value_(std::move(single_value)) {
  for (std::size_t i = 0; i < informable_.size(); ++i) {
    const Slot& s = informable_[i];
    if (s.name.empty()) throw ValidationError("empty informable slot name");
    if (!slot_index_.emplace(s.name, i).second) {
      throw ValidationError("duplicate informable slot '" + s.name + "'");
    }
    if (s.values.empty()) throw ValidationError("slot '" + s.name + "' has no values");
    NameSet seen;
    for (const auto& v : s.values) {
      if (v.empty()) throw ValidationError("empty value name in slot '" + s.name + "'");
      if (!seen.insert(v).second) {
        throw ValidationError("duplicate value '" + v + "' in slot '" + s.name + "'");
      }
    }
  }
  for (const auto& r : requestable_) {
    if (r.empty()) throw ValidationError("empty requestable slot name");
    if (!requestable_set_.insert(r).second) {
      throw ValidationError("duplicate requestable slot '" + r + "'");
    }
  }
  for (const auto& s : single_value_) {
    if (!slot_index_.contains(s)) {
      throw ValidationError("single-value slot '" + s + "' is not informable");
    }
  }
}

const Ontology::Slot* Ontology::find_slot(std::string_view name) const {
  auto it = slot_index_.find(name);
  return it == slot_index_.end() ? nullptr : &informable_[it->second];
}

const Ontology::Slot& Ontology::slot(std::string_view name) const {
  const Slot* s = find_slot(name);
  if (s == nullptr) throw ArgumentError("unknown informable slot '" + std::string(name) + "'");
  return *s;
}

bool Ontology::has_value(std::string_view slot, std::string_view value) const {
  const Slot* s = find_slot(slot);
  if (s == nullptr) return false;
  for (const auto& v : s->values) {
    if (v == value) return true;
  }
  return false;
}

bool Ontology::is_requestable(std::string_view slot) const {
  return requestable_set_.contains(slot);
}

bool Ontology::is_single_value(std::string_view slot) const {
  return single_value_.contains(slot);
}

std::size_t Ontology::num_values() const {
  std::size_t n = 0;
  for (const auto& s : informable_) n += s.values.size();
  return n;
}

Json Ontology::to_json() const {
  Json inf = Json::object();
  for (const auto& s : informable_) inf[s.name] = s.values;
  Json single = Json::array();
  for (const auto& s : single_value_) single.push_back(s);
  return Json{{"informable", inf}, {"requestable", requestable_}, {"single_value", single}};
}

Ontology Ontology::from_json(const Json& json) {
  if (!json.is_object() || !json.contains("informable") || !json["informable"].is_object()) {
    throw FormatError("ontology: expected an object with an 'informable' object");
  }
  std::vector<Slot> informable;
  for (const auto& [name, values] : json["informable"].items()) {
    if (!values.is_array()) throw FormatError("ontology: values of '" + name + "' must be a list");
    Slot s{name, {}};
    for (const auto& v : values) {
      if (!v.is_string()) throw FormatError("ontology: non-string value in '" + name + "'");
      s.values.push_back(v.get<std::string>());
    }
    informable.push_back(std::move(s));
  }
  std::vector<std::string> requestable;
  if (json.contains("requestable")) {
    if (!json["requestable"].is_array()) throw FormatError("ontology: 'requestable' must be a list");
    for (const auto& r : json["requestable"]) {
      if (!r.is_string()) throw FormatError("ontology: non-string requestable slot");
      requestable.push_back(r.get<std::string>());
    }
  }
  NameSet single;
  if (json.contains("single_value")) {
    if (!json["single_value"].is_array()) throw FormatError("ontology: 'single_value' must be a list");
    for (const auto& s : json["single_value"]) {
      if (!s.is_string()) throw FormatError("ontology: non-string single-value slot");
      single.insert(s.get<std::string>());
    }
  }
  return Ontology(std::move(informable), std::move(requestable), std::move(single));
}

Ontology Ontology::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open ontology file " + path);
  Json json;
  try {
    json = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError("ontology " + path + ": " + e.what());
  }
  return from_json(json);
}

void Ontology::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write ontology file " + path);
  out << to_json().dump(1) << '\n';
}

std::string Ontology::fingerprint() const {
  return fnv1a_hex(to_json().dump());
}

// ---------------------------------------------------------------------------
// Assignments

SlotLabel StateAssignment::slot_label(std::string_view slot) const {
  auto it = slot_labels.find(slot);
  return it == slot_labels.end() ? SlotLabel::kNotMentioned : it->second;
}

ValueLabel StateAssignment::value_label(std::string_view slot, std::string_view value) const {
  auto it = value_labels.find(slot);
  if (it == value_labels.end()) return ValueLabel::kNotMentioned;
  auto jt = it->second.find(value);
  return jt == it->second.end() ? ValueLabel::kNotMentioned : jt->second;
}

StateAssignment neutral_assignment(const Ontology& ontology) {
  StateAssignment a;
  for (const auto& s : ontology.informable()) {
    a.slot_labels[s.name] = SlotLabel::kNotMentioned;
    auto& values = a.value_labels[s.name];
    for (const auto& v : s.values) values[v] = ValueLabel::kNotMentioned;
  }
  return a;
}

SlotConstraint slot_label_constraint(const NameMap<ValueLabel>& value_labels) {
  for (const auto& [value, label] : value_labels) {
    if (label != ValueLabel::kNotMentioned) return SlotConstraint::kForcedMentioned;
  }
  return SlotConstraint::kFree;
}

void check_assignment(const StateAssignment& assignment, const Ontology& ontology) {
  if (assignment.slot_labels.size() != ontology.informable().size() ||
      assignment.value_labels.size() != ontology.informable().size()) {
    throw InconsistentAssignment("assignment does not cover the ontology's informable slots");
  }
  for (const auto& s : ontology.informable()) {
    auto sl = assignment.slot_labels.find(s.name);
    auto vl = assignment.value_labels.find(s.name);
    if (sl == assignment.slot_labels.end() || vl == assignment.value_labels.end() ||
        vl->second.size() != s.values.size()) {
      throw InconsistentAssignment("assignment does not cover slot '" + s.name + "'");
    }
    std::size_t likes = 0;
    for (const auto& v : s.values) {
      auto it = vl->second.find(v);
      if (it == vl->second.end()) {
        throw InconsistentAssignment("assignment misses value '" + v + "' of '" + s.name + "'");
      }
      if (it->second == ValueLabel::kLike) ++likes;
    }
    const bool forced = slot_label_constraint(vl->second) == SlotConstraint::kForcedMentioned;
    if (forced != (sl->second == SlotLabel::kMentioned)) {
      throw InconsistentAssignment("slot '" + s.name + "' is labelled " +
                                   std::string(to_string(sl->second)) +
                                   " but its value labels disagree");
    }
    if (ontology.is_single_value(s.name) && likes > 1) {
      throw InconsistentAssignment("single-value slot '" + s.name + "' has " +
                                   std::to_string(likes) + " LIKE values");
    }
  }
  for (const auto& r : assignment.requested) {
    if (!ontology.is_requestable(r)) {
      throw InconsistentAssignment("requested slot '" + r + "' is not requestable");
    }
  }
}

// ---------------------------------------------------------------------------
// Beliefs

const ValueDist& BeliefState::value(std::string_view slot, std::string_view value) const {
  auto it = value_dists.find(slot);
  if (it == value_dists.end()) throw ArgumentError("belief has no slot '" + std::string(slot) + "'");
  auto jt = it->second.find(value);
  if (jt == it->second.end()) {
    throw ArgumentError("belief has no value '" + std::string(value) + "' in slot '" +
                        std::string(slot) + "'");
  }
  return jt->second;
}

const SlotCond& BeliefState::slot_cond(std::string_view slot) const {
  auto it = slot_conds.find(slot);
  if (it == slot_conds.end()) throw ArgumentError("belief has no slot '" + std::string(slot) + "'");
  return it->second;
}

BeliefState new_belief_state(const Ontology& ontology) {
  BeliefState b;
  for (const auto& s : ontology.informable()) {
    auto& dists = b.value_dists[s.name];
    for (const auto& v : s.values) dists[v] = {0.0, 0.0, 1.0};
    b.slot_conds[s.name] = {0.0, 1.0};
  }
  return b;
}

void check_belief(const BeliefState& belief) {
  for (const auto& [slot, dists] : belief.value_dists) {
    for (const auto& [value, p] : dists) check_distribution(p, slot + "=" + value);
    check_distribution(belief.slot_cond(slot), slot);
  }
}

std::array<double, kNumSlotLabels> slot_label_marginal(const BeliefState& belief,
                                                       std::string_view slot) {
  auto it = belief.value_dists.find(slot);
  if (it == belief.value_dists.end()) {
    throw ArgumentError("belief has no slot '" + std::string(slot) + "'");
  }
  double none = 1.0;
  for (const auto& [value, p] : it->second) {
    none *= p[static_cast<std::size_t>(ValueLabel::kNotMentioned)];
  }
  const SlotCond& cond = belief.slot_cond(slot);
  return {none * cond[0], 1.0 - none, none * cond[1]};
}

double joint_probability(const BeliefState& belief, const StateAssignment& assignment) {
  if (assignment.value_labels.size() != belief.value_dists.size() ||
      assignment.slot_labels.size() != belief.value_dists.size()) {
    throw ArgumentError("assignment does not cover the belief's slots");
  }
  double joint = 1.0;
  for (const auto& [slot, dists] : belief.value_dists) {
    auto vl = assignment.value_labels.find(slot);
    auto sl = assignment.slot_labels.find(slot);
    if (vl == assignment.value_labels.end() || sl == assignment.slot_labels.end() ||
        vl->second.size() != dists.size()) {
      throw ArgumentError("assignment does not cover slot '" + slot + "'");
    }
    for (const auto& [value, p] : dists) {
      auto it = vl->second.find(value);
      if (it == vl->second.end()) {
        throw ArgumentError("assignment misses value '" + value + "' of slot '" + slot + "'");
      }
      joint *= p[static_cast<std::size_t>(it->second)];
    }
    const bool forced = slot_label_constraint(vl->second) == SlotConstraint::kForcedMentioned;
    if (forced != (sl->second == SlotLabel::kMentioned)) {
      throw InconsistentAssignment("slot '" + slot + "' label contradicts its value labels");
    }
    if (!forced) {
      const SlotCond& cond = belief.slot_cond(slot);
      joint *= sl->second == SlotLabel::kDontCare ? cond[0] : cond[1];
    }
  }
  return joint;
}

StateAssignment map_assignment(const BeliefState& belief, const Ontology& ontology) {
  StateAssignment a;
  for (const auto& s : ontology.informable()) {
    auto& labels = a.value_labels[s.name];
    const std::string* best_like = nullptr;
    double best_like_p = -1.0;
    for (const auto& v : s.values) {
      const ValueDist& p = belief.value(s.name, v);
      const auto label = static_cast<ValueLabel>(argmax(p));
      labels[v] = label;
      if (label == ValueLabel::kLike && p[0] > best_like_p) {
        best_like_p = p[0];
        best_like = &v;
      }
    }
    if (ontology.is_single_value(s.name) && best_like != nullptr) {
      for (auto& [v, label] : labels) {
        if (label == ValueLabel::kLike && v != *best_like) label = ValueLabel::kNotMentioned;
      }
    }
    if (slot_label_constraint(labels) == SlotConstraint::kForcedMentioned) {
      a.slot_labels[s.name] = SlotLabel::kMentioned;
    } else {
      const SlotCond& cond = belief.slot_cond(s.name);
      a.slot_labels[s.name] = argmax(cond) == 0 ? SlotLabel::kDontCare : SlotLabel::kNotMentioned;
    }
  }
  return a;
}

StateAssignment accumulate_turn(const StateAssignment& prev, const StateAssignment& turn) {
  StateAssignment out;
  for (const auto& [slot, prev_values] : prev.value_labels) {
    auto& values = out.value_labels[slot];
    for (const auto& [value, old_label] : prev_values) {
      const ValueLabel now = turn.value_label(slot, value);
      values[value] = now != ValueLabel::kNotMentioned ? now : old_label;
    }
    if (slot_label_constraint(values) == SlotConstraint::kForcedMentioned) {
      out.slot_labels[slot] = SlotLabel::kMentioned;
    } else if (turn.slot_label(slot) == SlotLabel::kDontCare) {
      out.slot_labels[slot] = SlotLabel::kDontCare;
    } else {
      out.slot_labels[slot] = prev.slot_label(slot);
    }
  }
  out.requested = turn.requested;
  return out;
}

StateAssignment accumulate_turn(const StateAssignment& prev, const StateAssignment& turn,
                                const Ontology& ontology) {
  StateAssignment out = accumulate_turn(prev, turn);
  for (const auto& slot : ontology.single_value()) {
    auto tv = turn.value_labels.find(slot);
    if (tv == turn.value_labels.end()) continue;
    auto& values = out.value_labels[slot];
    const bool turn_forced = slot_label_constraint(tv->second) == SlotConstraint::kForcedMentioned;
    const bool turn_likes =
        std::any_of(tv->second.begin(), tv->second.end(),
                    [](const auto& kv) { return kv.second == ValueLabel::kLike; });
    if (turn_likes) {
      for (auto& [value, label] : values) {
        if (label == ValueLabel::kLike && turn.value_label(slot, value) != ValueLabel::kLike) {
          label = ValueLabel::kNotMentioned;
        }
      }
    } else if (!turn_forced && turn.slot_label(slot) == SlotLabel::kDontCare) {
      for (auto& [value, label] : values) label = ValueLabel::kNotMentioned;
    }
    if (slot_label_constraint(values) == SlotConstraint::kForcedMentioned) {
      out.slot_labels[slot] = SlotLabel::kMentioned;
    } else if (turn.slot_label(slot) == SlotLabel::kDontCare) {
      out.slot_labels[slot] = SlotLabel::kDontCare;
    } else {
      const SlotLabel old = prev.slot_label(slot);
      out.slot_labels[slot] = old == SlotLabel::kMentioned ? SlotLabel::kNotMentioned : old;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// System acts

DialogAct DialogAct::request(std::string slot) {
  return DialogAct{Kind::kRequest, std::move(slot), {}, Polarity::kLike};
}

DialogAct DialogAct::confirm(std::string slot, std::string value, Polarity polarity) {
  return DialogAct{Kind::kConfirm, std::move(slot), std::move(value), polarity};
}

DialogAct DialogAct::confirm_dontcare(std::string slot) {
  return DialogAct{Kind::kConfirmDontCare, std::move(slot), {}, Polarity::kLike};
}

DialogAct DialogAct::inform(std::string slot, std::string value) {
  return DialogAct{Kind::kInform, std::move(slot), std::move(value), Polarity::kLike};
}

void check_system_act(const SystemAct& act, const Ontology& ontology) {
  for (const auto& a : act) {
    const bool informable = ontology.find_slot(a.slot) != nullptr;
    switch (a.kind) {
      case DialogAct::Kind::kRequest:
        if (!informable && !ontology.is_requestable(a.slot)) {
          throw ValidationError("system act requests unknown slot '" + a.slot + "'");
        }
        break;
      case DialogAct::Kind::kConfirm:
        if (!ontology.has_value(a.slot, a.value)) {
          throw ValidationError("system act confirms unknown value '" + a.slot + "=" + a.value + "'");
        }
        break;
      case DialogAct::Kind::kConfirmDontCare:
        if (!informable) {
          throw ValidationError("system act confirms dontcare on unknown slot '" + a.slot + "'");
        }
        break;
      case DialogAct::Kind::kInform:
        if (informable ? !ontology.has_value(a.slot, a.value) : !ontology.is_requestable(a.slot)) {
          throw ValidationError("system act informs unknown value '" + a.slot + "=" + a.value + "'");
        }
        break;
    }
  }
}

Json to_json(const DialogAct& act) {
  switch (act.kind) {
    case DialogAct::Kind::kRequest:
      return Json{{"act", "request"}, {"slot", act.slot}};
    case DialogAct::Kind::kConfirm:
      return Json{{"act", "confirm"},
                  {"slot", act.slot},
                  {"value", act.value},
                  {"polarity", act.polarity == Polarity::kLike ? "like" : "dislike"}};
    case DialogAct::Kind::kConfirmDontCare:
      return Json{{"act", "confirm_dontcare"}, {"slot", act.slot}};
    case DialogAct::Kind::kInform:
      return Json{{"act", "inform"}, {"slot", act.slot}, {"value", act.value}};
  }
  return Json();
}

DialogAct dialog_act_from_json(const Json& json) {
  auto field = [&](const char* key) {
    if (!json.contains(key) || !json[key].is_string()) {
      throw FormatError(std::string("system act lacks string field '") + key + "'");
    }
    return json[key].get<std::string>();
  };
  if (!json.is_object()) throw FormatError("system act must be an object");
  const std::string kind = field("act");
  if (kind == "request") return DialogAct::request(field("slot"));
  if (kind == "confirm_dontcare") return DialogAct::confirm_dontcare(field("slot"));
  if (kind == "inform") return DialogAct::inform(field("slot"), field("value"));
  if (kind == "confirm") {
    const std::string polarity = field("polarity");
    if (polarity != "like" && polarity != "dislike") {
      throw FormatError("confirm polarity must be 'like' or 'dislike', got '" + polarity + "'");
    }
    return DialogAct::confirm(field("slot"), field("value"),
                              polarity == "like" ? Polarity::kLike : Polarity::kDislike);
  }
  throw FormatError("unknown system act '" + kind + "'");
}

}  // namespace edst
