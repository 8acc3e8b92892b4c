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

#include "edst/metrics.hpp"

#include "edst/error.hpp"

namespace edst {

Json Metrics::to_json() const {
  Json j;
  j["turn_goal"] = turn_goal ? Json(*turn_goal) : Json(nullptr);
  j["joint_goal"] = joint_goal;
  j["request"] = request;
  Json slots = Json::object();
  for (const auto& [slot, acc] : per_slot) slots[slot] = acc;
  j["per_slot"] = slots;
  j["turns"] = turns;
  return j;
}

bool slot_match(const StateAssignment& predicted, const StateAssignment& gold,
                const Ontology::Slot& slot) {
  if (predicted.slot_label(slot.name) != gold.slot_label(slot.name)) return false;
  for (const auto& v : slot.values) {
    if (predicted.value_label(slot.name, v) != gold.value_label(slot.name, v)) return false;
  }
  return true;
}

bool goal_match(const StateAssignment& predicted, const StateAssignment& gold,
                const Ontology& ontology) {
  for (const auto& s : ontology.informable()) {
    if (!slot_match(predicted, gold, s)) return false;
  }
  return true;
}

Metrics score(const std::vector<Dialog>& dialogs, const std::vector<DialogTrace>& traces,
              const Ontology& ontology) {
  if (dialogs.size() != traces.size()) {
    throw ArgumentError("one prediction trace per dialog is required");
  }
  bool turn_level = true;
  for (std::size_t i = 0; i < dialogs.size() && turn_level; ++i) {
    if (traces[i].turn_predictions.size() != dialogs[i].turns.size()) turn_level = false;
    for (const auto& t : dialogs[i].turns) {
      if (!t.gold_turn) turn_level = false;
    }
  }

  Metrics m;
  std::size_t turn_hits = 0, joint_hits = 0, request_hits = 0;
  NameMap<std::size_t> slot_hits;
  for (const auto& s : ontology.informable()) slot_hits[s.name] = 0;
  for (std::size_t i = 0; i < dialogs.size(); ++i) {
    const Dialog& d = dialogs[i];
    const DialogTrace& trace = traces[i];
    if (trace.states.size() != d.turns.size()) {
      throw ArgumentError("trace for dialog '" + d.id + "' has the wrong number of turns");
    }
    const auto golds = gold_states(d, ontology);
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      const StateAssignment& pred = trace.states[t];
      if (goal_match(pred, golds[t], ontology)) ++joint_hits;
      if (pred.requested == d.turns[t].requested_gold) ++request_hits;
      for (const auto& s : ontology.informable()) {
        if (slot_match(pred, golds[t], s)) ++slot_hits[s.name];
      }
      if (turn_level && goal_match(trace.turn_predictions[t], *d.turns[t].gold_turn, ontology)) {
        ++turn_hits;
      }
      ++m.turns;
    }
  }
  if (m.turns == 0) return m;
  const double n = double(m.turns);
  m.joint_goal = double(joint_hits) / n;
  m.request = double(request_hits) / n;
  if (turn_level) m.turn_goal = double(turn_hits) / n;
  for (const auto& [slot, hits] : slot_hits) m.per_slot[slot] = double(hits) / n;
  return m;
}

Metrics evaluate(const TrackerModel& model, const std::vector<Dialog>& dialogs, bool use_asr) {
  std::vector<DialogTrace> traces;
  traces.reserve(dialogs.size());
  for (const auto& d : dialogs) {
    // Fail on missing gold before spending time on inference.
    gold_states(d, model.ontology());
    std::vector<TurnInput> turns;
    for (const auto& t : d.turns) turns.push_back(to_turn_input(t));
    traces.push_back(track_dialog_trace(model, turns, use_asr));
  }
  return score(dialogs, traces, model.ontology());
}

}  // namespace edst
