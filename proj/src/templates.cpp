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

#include "edst/templates.hpp"

#include <algorithm>

#include "edst/error.hpp"
#include "edst/text.hpp"

namespace edst {

namespace {

struct Surface {
  std::vector<std::string> tokens;
  std::string slot;
  std::string value;  // empty for slot-name mentions
};

std::vector<Surface> surfaces(const Ontology& ontology, const SemanticDictionary* dictionary) {
  std::vector<Surface> out;
  auto add = [&](const std::string& entity, const std::string& slot, const std::string& value) {
    out.push_back({entity_tokens(entity), slot, value});
    if (dictionary == nullptr) return;
    for (const auto& syn : dictionary->synonyms(entity)) {
      if (!syn.empty()) out.push_back({syn, slot, value});
    }
  };
  for (const auto& s : ontology.informable()) {
    for (const auto& v : s.values) add(v, s.name, v);
  }
  for (const auto& s : ontology.informable()) add(s.name, s.name, "");
  for (const auto& r : ontology.requestable()) add(r, r, "");
  // Longest first; the stable sort keeps ontology order among equals.
  std::stable_sort(out.begin(), out.end(), [](const Surface& a, const Surface& b) {
    return a.tokens.size() > b.tokens.size();
  });
  return out;
}

std::string value_placeholder(const std::string& slot) { return "<" + slot + ">"; }
std::string slot_placeholder(const std::string& slot) { return "[" + slot + "]"; }

}  // namespace

Delexicalised delexicalise(const Utterance& utterance, const Ontology& ontology,
                           const SemanticDictionary* dictionary) {
  const auto forms = surfaces(ontology, dictionary);
  const auto tokens = normalize_tokens(utterance.tokens);
  Delexicalised out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const Surface* hit = nullptr;
    for (const auto& f : forms) {
      if (f.tokens.empty() || i + f.tokens.size() > tokens.size()) continue;
      if (std::equal(f.tokens.begin(), f.tokens.end(), tokens.begin() + i)) {
        hit = &f;
        break;
      }
    }
    if (hit == nullptr) {
      out.tokens.push_back(tokens[i]);
      ++i;
      continue;
    }
    if (hit->value.empty()) {
      out.tokens.push_back(slot_placeholder(hit->slot));
    } else {
      out.tokens.push_back(value_placeholder(hit->slot));
      out.mentions.emplace_back(hit->slot, hit->value);
    }
    i += hit->tokens.size();
  }
  return out;
}

Json TemplateSet::to_json() const {
  Json list = Json::array();
  for (const auto& t : templates) {
    Json labels = Json::array();
    for (auto l : t.labels) labels.push_back(std::string(to_string(l)));
    Json dc = Json::array();
    for (const auto& s : t.dont_care) dc.push_back(s);
    Json req = Json::array();
    for (const auto& s : t.requested) req.push_back(s);
    list.push_back(Json{{"pattern", t.pattern}, {"labels", labels}, {"dont_care", dc},
                        {"requested", req}});
  }
  return Json{{"templates", list}};
}

TemplateSet TemplateSet::from_json(const Json& json, const Ontology& ontology) {
  TemplateSet set;
  try {
    for (const auto& jt : json.at("templates")) {
      Template t;
      t.pattern = jt.at("pattern").get<std::vector<std::string>>();
      for (const auto& l : jt.at("labels")) t.labels.push_back(parse_value_label(l.get<std::string>()));
      for (const auto& s : jt.at("dont_care")) {
        const auto name = s.get<std::string>();
        if (ontology.find_slot(name) == nullptr) {
          throw ValidationError("template names unknown slot '" + name + "'");
        }
        t.dont_care.insert(name);
      }
      for (const auto& s : jt.at("requested")) {
        const auto name = s.get<std::string>();
        if (!ontology.is_requestable(name)) {
          throw ValidationError("template names unknown requestable slot '" + name + "'");
        }
        t.requested.insert(name);
      }
      std::size_t placeholders = 0;
      for (const auto& tok : t.pattern) {
        if (tok.size() > 2 && tok.front() == '<' && tok.back() == '>') {
          if (ontology.find_slot(tok.substr(1, tok.size() - 2)) == nullptr) {
            throw ValidationError("template placeholder '" + tok + "' names no slot");
          }
          ++placeholders;
        }
      }
      if (placeholders != t.labels.size()) {
        throw FormatError("template labels do not match its placeholders");
      }
      set.templates.push_back(std::move(t));
    }
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad template file: ") + e.what());
  }
  return set;
}

TemplateSet extract_templates(const std::vector<Dialog>& dialogs, const Ontology& ontology,
                              const SemanticDictionary* dictionary) {
  TemplateSet set;
  for (const auto& d : dialogs) {
    for (const auto& turn : d.turns) {
      if (!turn.gold_turn) continue;
      const StateAssignment& gold = *turn.gold_turn;
      const Delexicalised delex = delexicalise(turn.user, ontology, dictionary);

      Template t;
      t.pattern = delex.tokens;
      bool covered = true;
      for (const auto& [slot, values] : gold.value_labels) {
        for (const auto& [value, label] : values) {
          if (label == ValueLabel::kNotMentioned) continue;
          const bool seen = std::any_of(delex.mentions.begin(), delex.mentions.end(),
                                        [&](const auto& m) {
                                          return m.first == slot && m.second == value;
                                        });
          if (!seen) covered = false;
        }
      }
      if (!covered) continue;
      for (const auto& [slot, value] : delex.mentions) t.labels.push_back(gold.value_label(slot, value));
      for (const auto& [slot, label] : gold.slot_labels) {
        if (label == SlotLabel::kDontCare) t.dont_care.insert(slot);
      }
      t.requested = turn.requested_gold;
      if (delex.mentions.empty() && t.dont_care.empty() && t.requested.empty()) continue;
      if (std::find(set.templates.begin(), set.templates.end(), t) == set.templates.end()) {
        set.templates.push_back(std::move(t));
      }
    }
  }
  return set;
}

double token_similarity(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0 && m == 0) return 1.0;
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return 1.0 - double(prev[m]) / double(std::max(n, m));
}

StateAssignment template_track(const TemplateSet& templates, const Ontology& ontology,
                               const SemanticDictionary* dictionary, const Utterance& utterance,
                               double threshold) {
  StateAssignment out = neutral_assignment(ontology);
  if (templates.templates.empty()) return out;
  const Delexicalised delex = delexicalise(utterance, ontology, dictionary);
  const Template* best = nullptr;
  double best_sim = -1.0;
  for (const auto& t : templates.templates) {
    const double sim = token_similarity(delex.tokens, t.pattern);
    if (sim > best_sim) {
      best_sim = sim;
      best = &t;
    }
  }
  if (best == nullptr || best_sim < threshold) return out;

  // The k-th placeholder of a slot in the template takes the k-th mention of
  // that slot in the utterance.
  NameMap<std::vector<std::string>> mentions;
  for (const auto& [slot, value] : delex.mentions) mentions[slot].push_back(value);
  NameMap<std::size_t> used;
  std::size_t label_index = 0;
  for (const auto& tok : best->pattern) {
    if (tok.size() <= 2 || tok.front() != '<' || tok.back() != '>') continue;
    const std::string slot = tok.substr(1, tok.size() - 2);
    const ValueLabel label = best->labels[label_index++];
    const auto it = mentions.find(slot);
    const std::size_t k = used[slot]++;
    if (it == mentions.end() || k >= it->second.size()) continue;
    if (label == ValueLabel::kNotMentioned) continue;
    out.value_labels[slot][it->second[k]] = label;
    out.slot_labels[slot] = SlotLabel::kMentioned;
  }
  for (const auto& slot : best->dont_care) {
    if (slot_label_constraint(out.value_labels[slot]) == SlotConstraint::kFree) {
      out.slot_labels[slot] = SlotLabel::kDontCare;
    }
  }
  out.requested = best->requested;
  return out;
}

Metrics evaluate_templates(const TemplateSet& templates, const Ontology& ontology,
                           const SemanticDictionary* dictionary,
                           const std::vector<Dialog>& dialogs, double threshold) {
  std::vector<DialogTrace> traces;
  for (const auto& d : dialogs) {
    DialogTrace trace;
    StateAssignment state = neutral_assignment(ontology);
    for (const auto& turn : d.turns) {
      StateAssignment pred = template_track(templates, ontology, dictionary, turn.user, threshold);
      state = accumulate_turn(state, pred, ontology);
      trace.turn_predictions.push_back(std::move(pred));
      trace.states.push_back(state);
    }
    traces.push_back(std::move(trace));
  }
  return score(dialogs, traces, ontology);
}

}  // namespace edst
