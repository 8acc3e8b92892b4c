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

#include "edst/adapters.hpp"

#include <cctype>

#include "edst/error.hpp"

namespace edst {

std::vector<std::string> simple_tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isspace(u)) {
      flush();
    } else if (c == '.' || c == ',' || c == '?' || c == '!') {
      flush();
      out.emplace_back(1, c);
    } else {
      cur.push_back(static_cast<char>(u < 0x80 ? std::tolower(u) : u));
    }
  }
  flush();
  return out;
}

namespace {

// Applies one (slot, value) label to an assignment; returns false when the
// pair lies outside the ontology.
bool apply_label(StateAssignment& a, const Ontology& ontology, const std::string& slot,
                 const std::string& value) {
  if (slot == "request") {
    if (!ontology.is_requestable(value)) return false;
    a.requested.insert(value);
    return true;
  }
  if (ontology.find_slot(slot) == nullptr) return false;
  if (value == "dontcare") {
    if (slot_label_constraint(a.value_labels[slot]) == SlotConstraint::kFree) {
      a.slot_labels[slot] = SlotLabel::kDontCare;
    }
    return true;
  }
  if (!ontology.has_value(slot, value)) return false;
  a.value_labels[slot][value] = ValueLabel::kLike;
  a.slot_labels[slot] = SlotLabel::kMentioned;
  return true;
}

}  // namespace

std::vector<Dialog> convert_woz(const Json& source, const Ontology& ontology,
                                const WozOptions& options, ConversionReport& report) {
  if (!source.is_array()) throw FormatError("WOZ source must be a list of dialogues");
  std::vector<Dialog> dialogs;
  for (const auto& jd : source) {
    Dialog d;
    try {
      const Json& idx = jd.at("dialogue_idx");
      d.id = idx.is_string() ? idx.get<std::string>() : idx.dump();
      for (const auto& jt : jd.at("dialogue")) {
        Turn turn;
        for (const auto& act : jt.at("system_acts")) {
          if (act.is_string()) {
            const std::string slot = act.get<std::string>();
            if (ontology.find_slot(slot) != nullptr || ontology.is_requestable(slot)) {
              turn.system_acts.push_back(DialogAct::request(slot));
            } else {
              ++report.skipped_acts;
            }
          } else if (act.is_array() && act.size() == 2) {
            const std::string slot = act[0].get<std::string>();
            const std::string value = act[1].get<std::string>();
            if (ontology.has_value(slot, value)) {
              turn.system_acts.push_back(DialogAct::confirm(slot, value, Polarity::kLike));
            } else {
              ++report.skipped_acts;
            }
          } else {
            ++report.skipped_acts;
          }
        }
        turn.user.tokens = simple_tokenize(jt.at("transcript").get<std::string>());
        if (options.keep_asr && jt.contains("asr") && jt.at("asr").is_array() &&
            !jt.at("asr").empty()) {
          std::vector<AsrHypothesis> hyps;
          for (const auto& h : jt.at("asr")) {
            AsrHypothesis hyp;
            hyp.utterance.tokens = simple_tokenize(h.at(0).get<std::string>());
            hyp.score = h.at(1).get<double>();
            hyps.push_back(std::move(hyp));
          }
          turn.asr = std::move(hyps);
        }

        StateAssignment tl = neutral_assignment(ontology);
        for (const auto& pair : jt.at("turn_label")) {
          if (!apply_label(tl, ontology, pair.at(0).get<std::string>(),
                           pair.at(1).get<std::string>())) {
            ++report.skipped_labels;
          }
        }
        turn.requested_gold = tl.requested;
        turn.gold_turn = tl;
        if (jt.contains("belief_state")) {
          StateAssignment st = neutral_assignment(ontology);
          for (const auto& b : jt.at("belief_state")) {
            if (b.value("act", "") != "inform") continue;
            for (const auto& pair : b.at("slots")) {
              if (!apply_label(st, ontology, pair.at(0).get<std::string>(),
                               pair.at(1).get<std::string>())) {
                ++report.skipped_labels;
              }
            }
          }
          st.requested = turn.requested_gold;
          turn.gold_state = st;
        }
        d.turns.push_back(std::move(turn));
        ++report.turns;
      }
    } catch (const Json::exception& e) {
      throw FormatError("WOZ dialogue '" + d.id + "': " + e.what());
    }
    dialogs.push_back(std::move(d));
    ++report.dialogs;
  }
  return dialogs;
}

}  // namespace edst
