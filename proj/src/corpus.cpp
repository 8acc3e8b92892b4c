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

#include "edst/corpus.hpp"

#include <fstream>
#include <sstream>

#include "edst/error.hpp"

namespace edst {

namespace {

std::vector<std::string> tokens_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw FormatError(where + ": expected a token array");
  std::vector<std::string> out;
  out.reserve(j.size());
  for (const auto& t : j) {
    if (!t.is_string() || t.get_ref<const std::string&>().empty()) {
      throw FormatError(where + ": tokens must be non-empty strings");
    }
    out.push_back(t.get<std::string>());
  }
  return out;
}

const Ontology::Slot& informable_slot(const Ontology& ontology, const std::string& slot) {
  const auto* s = ontology.find_slot(slot);
  if (s == nullptr) throw ValidationError("unknown informable slot '" + slot + "'");
  return *s;
}

void check_value(const Ontology& ontology, const std::string& slot, const std::string& value) {
  informable_slot(ontology, slot);
  if (!ontology.has_value(slot, value)) {
    throw ValidationError("unknown value '" + value + "' for slot '" + slot + "'");
  }
}

void set_derived_slot_labels(StateAssignment& a) {
  for (const auto& [slot, values] : a.value_labels) {
    if (slot_label_constraint(values) == SlotConstraint::kForcedMentioned) {
      a.slot_labels[slot] = SlotLabel::kMentioned;
    }
  }
}

StateAssignment turn_labels_from_json(const Json& j, const Ontology& ontology) {
  if (!j.is_object()) throw FormatError("'turn' labels must be an object");
  StateAssignment a = neutral_assignment(ontology);
  for (const auto& [slot, entry] : j.items()) {
    const auto& s = informable_slot(ontology, slot);
    if (entry.is_string()) {
      if (entry.get<std::string>() != "dont_care") {
        throw FormatError("turn label for slot '" + slot + "' must be 'dont_care' or an object");
      }
      a.slot_labels[s.name] = SlotLabel::kDontCare;
      continue;
    }
    if (!entry.is_object()) throw FormatError("turn label for slot '" + slot + "' is malformed");
    for (const auto& [value, label] : entry.items()) {
      check_value(ontology, slot, value);
      if (!label.is_string()) throw FormatError("value label must be a string");
      const ValueLabel l = parse_value_label(label.get<std::string>());
      if (l == ValueLabel::kNotMentioned) {
        throw FormatError("turn labels list only 'like' or 'dislike'");
      }
      a.value_labels[s.name][value] = l;
    }
  }
  set_derived_slot_labels(a);
  return a;
}

Json turn_labels_to_json(const StateAssignment& a) {
  Json j = Json::object();
  for (const auto& [slot, values] : a.value_labels) {
    Json jv = Json::object();
    for (const auto& [value, label] : values) {
      if (label != ValueLabel::kNotMentioned) jv[value] = std::string(to_string(label));
    }
    if (!jv.empty()) {
      j[slot] = jv;
    } else if (a.slot_label(slot) == SlotLabel::kDontCare) {
      j[slot] = "dont_care";
    }
  }
  return j;
}

StateAssignment state_labels_from_json(const Json& j, const Ontology& ontology) {
  if (!j.is_object()) throw FormatError("'state' labels must be an object");
  StateAssignment a = neutral_assignment(ontology);
  if (j.contains("values")) {
    const Json& jv = j.at("values");
    if (!jv.is_object()) throw FormatError("'state.values' must be an object");
    for (const auto& [slot, values] : jv.items()) {
      informable_slot(ontology, slot);
      if (!values.is_object()) throw FormatError("'state.values' entries must be objects");
      for (const auto& [value, label] : values.items()) {
        check_value(ontology, slot, value);
        if (!label.is_string()) throw FormatError("value label must be a string");
        a.value_labels[slot][value] = parse_value_label(label.get<std::string>());
      }
    }
  }
  set_derived_slot_labels(a);
  if (j.contains("slots")) {
    const Json& js = j.at("slots");
    if (!js.is_object()) throw FormatError("'state.slots' must be an object");
    for (const auto& [slot, label] : js.items()) {
      informable_slot(ontology, slot);
      if (!label.is_string()) throw FormatError("slot label must be a string");
      a.slot_labels[slot] = parse_slot_label(label.get<std::string>());
    }
  }
  return a;
}

Json state_labels_to_json(const StateAssignment& a) {
  Json slots = Json::object();
  for (const auto& [slot, label] : a.slot_labels) {
    if (label != SlotLabel::kNotMentioned) slots[slot] = std::string(to_string(label));
  }
  Json values = Json::object();
  for (const auto& [slot, vals] : a.value_labels) {
    Json jv = Json::object();
    for (const auto& [value, label] : vals) {
      if (label != ValueLabel::kNotMentioned) jv[value] = std::string(to_string(label));
    }
    if (!jv.empty()) values[slot] = jv;
  }
  return Json{{"slots", slots}, {"values", values}};
}

}  // namespace

Turn turn_from_json(const Json& j, const Ontology& ontology) {
  if (!j.is_object()) throw FormatError("turn must be an object");
  Turn turn;
  if (j.contains("system_acts")) {
    const Json& acts = j.at("system_acts");
    if (!acts.is_array()) throw FormatError("'system_acts' must be an array");
    for (const auto& a : acts) turn.system_acts.push_back(dialog_act_from_json(a));
    check_system_act(turn.system_acts, ontology);
  }
  if (!j.contains("user")) throw FormatError("turn is missing 'user'");
  turn.user.tokens = tokens_from_json(j.at("user"), "'user'");
  if (j.contains("asr")) {
    const Json& asr = j.at("asr");
    if (!asr.is_array()) throw FormatError("'asr' must be an array");
    std::vector<AsrHypothesis> hyps;
    for (const auto& h : asr) {
      if (!h.is_object() || !h.contains("tokens") || !h.contains("score") ||
          !h.at("score").is_number()) {
        throw FormatError("ASR hypotheses need 'tokens' and a numeric 'score'");
      }
      AsrHypothesis hyp;
      hyp.utterance.tokens = tokens_from_json(h.at("tokens"), "'asr.tokens'");
      hyp.score = h.at("score").get<double>();
      if (!(hyp.score >= 0.0)) throw FormatError("ASR scores must be non-negative");
      hyps.push_back(std::move(hyp));
    }
    turn.asr = std::move(hyps);
  }
  if (j.contains("labels")) {
    const Json& labels = j.at("labels");
    if (!labels.is_object()) throw FormatError("'labels' must be an object");
    if (labels.contains("requested")) {
      const Json& req = labels.at("requested");
      if (!req.is_array()) throw FormatError("'requested' must be an array");
      for (const auto& r : req) {
        if (!r.is_string()) throw FormatError("'requested' entries must be strings");
        const std::string slot = r.get<std::string>();
        if (!ontology.is_requestable(slot)) {
          throw ValidationError("unknown requestable slot '" + slot + "'");
        }
        turn.requested_gold.insert(slot);
      }
    }
    if (labels.contains("turn")) {
      turn.gold_turn = turn_labels_from_json(labels.at("turn"), ontology);
      turn.gold_turn->requested = turn.requested_gold;
    }
    if (labels.contains("state")) {
      turn.gold_state = state_labels_from_json(labels.at("state"), ontology);
      turn.gold_state->requested = turn.requested_gold;
      try {
        check_assignment(*turn.gold_state, ontology);
      } catch (const InconsistentAssignment& e) {
        throw ValidationError(e.what());
      }
    }
  }
  return turn;
}

Json turn_to_json(const Turn& turn) {
  Json j;
  Json acts = Json::array();
  for (const auto& a : turn.system_acts) acts.push_back(to_json(a));
  j["system_acts"] = acts;
  j["user"] = turn.user.tokens;
  if (turn.asr) {
    Json asr = Json::array();
    for (const auto& h : *turn.asr) {
      asr.push_back(Json{{"tokens", h.utterance.tokens}, {"score", h.score}});
    }
    j["asr"] = asr;
  }
  Json labels = Json::object();
  if (turn.gold_turn) labels["turn"] = turn_labels_to_json(*turn.gold_turn);
  if (turn.gold_state) labels["state"] = state_labels_to_json(*turn.gold_state);
  Json req = Json::array();
  for (const auto& r : turn.requested_gold) req.push_back(r);
  labels["requested"] = req;
  j["labels"] = labels;
  return j;
}

std::vector<Dialog> corpus_from_json(const Json& json, const Ontology& ontology) {
  if (!json.is_object() || !json.contains("dialogs") || !json.at("dialogs").is_array()) {
    throw FormatError("corpus: expected an object with a 'dialogs' array");
  }
  std::vector<Dialog> dialogs;
  std::size_t index = 0;
  for (const auto& jd : json.at("dialogs")) {
    Dialog d;
    if (!jd.is_object() || !jd.contains("id") || !jd.at("id").is_string() ||
        jd.at("id").get_ref<const std::string&>().empty()) {
      throw FormatError("corpus: dialog #" + std::to_string(index) + " needs a non-empty 'id'");
    }
    d.id = jd.at("id").get<std::string>();
    if (!jd.contains("turns") || !jd.at("turns").is_array()) {
      throw FormatError("corpus: dialog '" + d.id + "' needs a 'turns' array");
    }
    std::size_t t = 0;
    for (const auto& jt : jd.at("turns")) {
      const std::string where = "dialog '" + d.id + "' turn " + std::to_string(t);
      try {
        d.turns.push_back(turn_from_json(jt, ontology));
      } catch (const FormatError& e) {
        throw FormatError(where + ": " + e.what());
      } catch (const ValidationError& e) {
        throw ValidationError(where + ": " + e.what());
      } catch (const ArgumentError& e) {
        throw FormatError(where + ": " + e.what());
      } catch (const Json::exception& e) {
        throw FormatError(where + ": " + e.what());
      }
      ++t;
    }
    dialogs.push_back(std::move(d));
    ++index;
  }
  return dialogs;
}

Json corpus_to_json(const std::vector<Dialog>& dialogs) {
  Json list = Json::array();
  for (const auto& d : dialogs) {
    Json turns = Json::array();
    for (const auto& t : d.turns) turns.push_back(turn_to_json(t));
    list.push_back(Json{{"id", d.id}, {"turns", turns}});
  }
  return Json{{"dialogs", list}};
}

std::vector<Dialog> load_corpus(const std::string& path, const Ontology& ontology) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open corpus '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw FormatError("corpus '" + path + "': " + e.what());
  }
  return corpus_from_json(j, ontology);
}

void save_corpus(const std::vector<Dialog>& dialogs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << corpus_to_json(dialogs).dump(1) << '\n';
  if (!out) throw Error("failed to write '" + path + "'");
}

TurnInput to_turn_input(const Turn& turn) {
  return TurnInput{turn.user, turn.system_acts, turn.asr};
}

std::vector<StateAssignment> gold_states(const Dialog& dialog, const Ontology& ontology) {
  std::vector<StateAssignment> out;
  StateAssignment running = neutral_assignment(ontology);
  for (std::size_t t = 0; t < dialog.turns.size(); ++t) {
    const Turn& turn = dialog.turns[t];
    if (turn.gold_state) {
      running = *turn.gold_state;
    } else if (turn.gold_turn) {
      running = accumulate_turn(running, *turn.gold_turn, ontology);
    } else {
      throw DataError("dialog '" + dialog.id + "' turn " + std::to_string(t) +
                      " has no gold labels");
    }
    running.requested = turn.requested_gold;
    out.push_back(running);
  }
  return out;
}

std::vector<StateAssignment> gold_turns(const Dialog& dialog) {
  std::vector<StateAssignment> out;
  for (std::size_t t = 0; t < dialog.turns.size(); ++t) {
    if (!dialog.turns[t].gold_turn) {
      throw DataError("dialog '" + dialog.id + "' turn " + std::to_string(t) +
                      " has no turn-level labels");
    }
    out.push_back(*dialog.turns[t].gold_turn);
  }
  return out;
}

std::size_t num_value_classes(LabelScheme scheme) {
  return scheme == LabelScheme::kEnriched3 ? 3 : 2;
}

std::size_t value_class(ValueLabel label, LabelScheme scheme) {
  if (scheme == LabelScheme::kEnriched3) return static_cast<std::size_t>(label);
  return label == ValueLabel::kNotMentioned ? 1 : 0;
}

std::vector<TrainingExample> decompose(const Dialog& dialog, const Ontology& ontology,
                                       const TrackerMode& mode) {
  const std::vector<StateAssignment> golds =
      mode.use_prev_belief ? gold_states(dialog, ontology) : gold_turns(dialog);
  const std::size_t classes = num_value_classes(mode.labels);
  const StateAssignment neutral = neutral_assignment(ontology);

  std::vector<TrainingExample> out;
  for (std::size_t t = 0; t < dialog.turns.size(); ++t) {
    const Turn* turn = &dialog.turns[t];
    const StateAssignment& gold = golds[t];
    const StateAssignment& prev = t == 0 ? neutral : golds[t - 1];
    for (const auto& s : ontology.informable()) {
      for (const auto& v : s.values) {
        TrainingExample ex;
        ex.kind = ExampleKind::kValue;
        ex.slot = s.name;
        ex.value = v;
        ex.turn = turn;
        if (mode.use_prev_belief) {
          ex.belief.assign(classes, 0.0);
          ex.belief[value_class(prev.value_label(s.name, v), mode.labels)] = 1.0;
        }
        ex.gold = value_class(gold.value_label(s.name, v), mode.labels);
        out.push_back(std::move(ex));
      }
      const auto gold_values = gold.value_labels.find(s.name);
      if (gold_values != gold.value_labels.end() &&
          slot_label_constraint(gold_values->second) == SlotConstraint::kForcedMentioned) {
        continue;
      }
      TrainingExample ex;
      ex.kind = ExampleKind::kSlot;
      ex.slot = s.name;
      ex.turn = turn;
      if (mode.use_prev_belief) {
        ex.belief.assign(kNumSlotLabels, 0.0);
        ex.belief[static_cast<std::size_t>(prev.slot_label(s.name))] = 1.0;
      }
      ex.gold = gold.slot_label(s.name) == SlotLabel::kDontCare ? 0 : 1;
      out.push_back(std::move(ex));
    }
    for (const auto& r : ontology.requestable()) {
      TrainingExample ex;
      ex.kind = ExampleKind::kRequest;
      ex.slot = r;
      ex.turn = turn;
      ex.gold = turn->requested_gold.contains(r) ? 0 : 1;
      out.push_back(std::move(ex));
    }
  }
  return out;
}

}  // namespace edst
