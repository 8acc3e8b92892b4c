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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "edst/corpus.hpp"
#include "edst/error.hpp"
#include "edst/text.hpp"

namespace edst {

namespace {

using Phrase = std::vector<std::string>;

Phrase split(std::string_view text) {
  Phrase out;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

struct Lexicon {
  // entity -> synonym phrases (the canonical name is always usable too)
  std::vector<std::pair<std::string, std::vector<std::string>>> synonyms = {
      {"action", {"fighting", "martial arts"}},
      {"comedy", {"funny", "hilarious"}},
      {"drama", {"serious", "emotional"}},
      {"horror", {"scary", "spooky"}},
      {"american", {"hollywood", "us"}},
      {"chinese", {"mandarin", "hong kong"}},
      {"french", {"parisian", "gallic"}},
      {"korean", {"seoul", "hallyu"}},
      {"seventies", {"70s", "retro"}},
      {"eighties", {"80s"}},
      {"nineties", {"90s"}},
      {"recent", {"new", "latest"}},
      {"genre", {"kind", "type"}},
      {"country", {"origin"}},
      {"decade", {"era", "period"}},
      {"length", {"duration", "runtime"}},
      {"rating", {"score", "reviews"}},
  };

  const std::vector<std::string>& of(const std::string& entity) const {
    for (const auto& [e, s] : synonyms) {
      if (e == entity) return s;
    }
    throw ArgumentError("no synonyms for '" + entity + "'");
  }
};

const std::vector<std::string> kInform = {"i want {v} movies", "show me {v} films",
                                          "something {v}", "{v} please", "what about {v}"};
const std::vector<std::string> kInformTwo = {"{v} or {w}", "i like {v} and {w}",
                                             "either {v} or {w} is good"};
const std::vector<std::string> kDeny = {"no {v}", "i do not want {v}", "not {v}"};
const std::vector<std::string> kChange = {"not {v} but {w}", "instead of {v} give me {w}"};
const std::vector<std::string> kDontCare = {"any {s} is fine", "i do not care about the {s}",
                                            "the {s} does not matter", "whatever {s}"};
const std::vector<std::string> kAnswer = {"{v}", "{v} please", "i prefer {v}"};
const std::vector<std::string> kAnything = {"anything", "any is fine", "i do not mind"};
const std::vector<std::string> kYes = {"yes", "yes please", "right", "correct"};
const std::vector<std::string> kNo = {"no", "no thanks", "wrong"};
const std::vector<std::string> kNoInstead = {"no i want {w}", "no give me {w}"};
const std::vector<std::pair<std::string, std::vector<std::string>>> kRequest = {
    {"length", {"how long is it", "what is the {r}", "tell me the {r}"}},
    {"rating", {"what is the {r}", "how are the {r}", "is the {r} good"}},
};
const std::vector<std::string> kPrefix = {"well", "hmm", "ok", "hello"};
const std::vector<std::string> kSuffix = {"please", "thanks", "then"};

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  return items[uniform_index(rng, items.size())];
}

class Generator {
 public:
  Generator(const Ontology& ontology, const Lexicon& lexicon, Rng& rng)
      : ontology_(ontology), lexicon_(lexicon), rng_(rng) {}

  Dialog dialog(std::string id, std::size_t turns) {
    Dialog d;
    d.id = std::move(id);
    state_ = neutral_assignment(ontology_);
    for (std::size_t t = 0; t < turns; ++t) d.turns.push_back(turn());
    return d;
  }

 private:
  // A surface form of an entity: its own name or one of its synonyms.
  std::string surface(const std::string& entity) {
    const auto& syn = lexicon_.of(entity);
    if (syn.empty() || uniform01(rng_) < 0.5) return entity;
    return pick(syn, rng_);
  }

  std::string fill(std::string text, const std::string& key, const std::string& entity) {
    const std::string mark = "{" + key + "}";
    for (auto pos = text.find(mark); pos != std::string::npos; pos = text.find(mark)) {
      text.replace(pos, mark.size(), surface(entity));
    }
    return text;
  }

  const Ontology::Slot& random_slot() { return pick(ontology_.informable(), rng_); }

  std::string other_value(const Ontology::Slot& s, const std::string& v) {
    std::string w;
    do {
      w = pick(s.values, rng_);
    } while (w == v);
    return w;
  }

  bool slot_free(const std::string& slot) const {
    return slot_label_constraint(state_.value_labels.at(slot)) == SlotConstraint::kFree;
  }

  std::vector<std::string> liked(const std::string& slot) const {
    std::vector<std::string> out;
    for (const auto& [v, l] : state_.value_labels.at(slot)) {
      if (l == ValueLabel::kLike) out.push_back(v);
    }
    return out;
  }

  void label(StateAssignment& t, const std::string& slot, const std::string& value,
             ValueLabel l) {
    t.value_labels[slot][value] = l;
    t.slot_labels[slot] = SlotLabel::kMentioned;
  }

  std::string request_phrase(StateAssignment& t) {
    const auto& [slot, phrases] = pick(kRequest, rng_);
    t.requested.insert(slot);
    return fill(pick(phrases, rng_), "r", slot);
  }

  std::string free_intent(StateAssignment& t) {
    const double u = uniform01(rng_);
    const auto& s = random_slot();
    const std::string v = pick(s.values, rng_);
    if (u < 0.30) {
      label(t, s.name, v, ValueLabel::kLike);
      return fill(pick(kInform, rng_), "v", v);
    }
    if (u < 0.40) {
      const std::string w = other_value(s, v);
      label(t, s.name, v, ValueLabel::kLike);
      label(t, s.name, w, ValueLabel::kLike);
      return fill(fill(pick(kInformTwo, rng_), "v", v), "w", w);
    }
    if (u < 0.60) {
      label(t, s.name, v, ValueLabel::kDislike);
      return fill(pick(kDeny, rng_), "v", v);
    }
    if (u < 0.75) {
      const auto current = liked(s.name);
      const std::string old = current.empty() ? v : pick(current, rng_);
      const std::string w = other_value(s, old);
      label(t, s.name, old, ValueLabel::kDislike);
      label(t, s.name, w, ValueLabel::kLike);
      return fill(fill(pick(kChange, rng_), "v", old), "w", w);
    }
    if (u < 0.85 && slot_free(s.name)) {
      t.slot_labels[s.name] = SlotLabel::kDontCare;
      return fill(pick(kDontCare, rng_), "s", s.name);
    }
    if (u < 0.925) return request_phrase(t);
    label(t, s.name, v, ValueLabel::kLike);
    return fill(pick(kInform, rng_), "v", v) + " and " + request_phrase(t);
  }

  Turn turn() {
    Turn turn;
    StateAssignment t = neutral_assignment(ontology_);
    std::string text;
    const double u = uniform01(rng_);
    const auto& s = random_slot();
    if (u < 0.15) {
      turn.system_acts.push_back(DialogAct::request(s.name));
      if (uniform01(rng_) < 0.3 && slot_free(s.name)) {
        t.slot_labels[s.name] = SlotLabel::kDontCare;
        text = pick(kAnything, rng_);
      } else {
        const std::string v = pick(s.values, rng_);
        label(t, s.name, v, ValueLabel::kLike);
        text = fill(pick(kAnswer, rng_), "v", v);
      }
    } else if (u < 0.35) {
      const auto current = liked(s.name);
      const std::string v =
          !current.empty() && uniform01(rng_) < 0.7 ? pick(current, rng_) : pick(s.values, rng_);
      turn.system_acts.push_back(DialogAct::confirm(s.name, v, Polarity::kLike));
      const double r = uniform01(rng_);
      if (r < 0.5) {
        label(t, s.name, v, ValueLabel::kLike);
        text = pick(kYes, rng_);
      } else if (r < 0.8) {
        label(t, s.name, v, ValueLabel::kDislike);
        text = pick(kNo, rng_);
      } else {
        const std::string w = other_value(s, v);
        label(t, s.name, v, ValueLabel::kDislike);
        label(t, s.name, w, ValueLabel::kLike);
        text = fill(pick(kNoInstead, rng_), "w", w);
      }
    } else if (u < 0.40 && slot_free(s.name)) {
      turn.system_acts.push_back(DialogAct::confirm_dontcare(s.name));
      if (uniform01(rng_) < 0.6) {
        t.slot_labels[s.name] = SlotLabel::kDontCare;
        text = pick(kYes, rng_);
      } else {
        text = pick(kNo, rng_);
      }
    } else {
      if (u < 0.55) turn.system_acts.push_back(DialogAct::inform(s.name, pick(s.values, rng_)));
      text = free_intent(t);
    }
    if (uniform01(rng_) < 0.3) text = pick(kPrefix, rng_) + " " + text;
    if (uniform01(rng_) < 0.2) text += " " + pick(kSuffix, rng_);

    turn.user.tokens = split(text);
    turn.requested_gold = t.requested;
    state_ = accumulate_turn(state_, t, ontology_);
    turn.gold_turn = t;
    turn.gold_state = state_;
    return turn;
  }

  const Ontology& ontology_;
  const Lexicon& lexicon_;
  Rng& rng_;
  StateAssignment state_;
};

void collect_words(const std::string& text, NameSet& words) {
  for (auto& w : split(text)) {
    if (w.front() != '{') words.insert(w);
  }
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticConfig& config, std::uint64_t seed) {
  if (config.dialogs == 0) throw ArgumentError("synthetic corpus needs at least one dialog");
  if (config.min_turns == 0 || config.min_turns > config.max_turns) {
    throw ArgumentError("synthetic turn range is empty");
  }
  if (config.embedding_dim == 0) throw ArgumentError("embedding dimension must be positive");

  const Lexicon lexicon;
  Ontology ontology({{"genre", {"action", "comedy", "drama", "horror"}},
                     {"country", {"american", "chinese", "french", "korean"}},
                     {"decade", {"seventies", "eighties", "nineties", "recent"}}},
                    {"length", "rating"}, {});
  SemanticDictionary dictionary;
  for (const auto& [entity, syns] : lexicon.synonyms) {
    for (const auto& s : syns) dictionary.add(entity, split(s));
  }

  Rng rng(seed);
  // Canonical words get random vectors of norm about 2; synonym tokens sit
  // near their entity's vector; every other word is random.
  const std::size_t d = config.embedding_dim;
  const double scale = 2.0 / std::sqrt(double(d));
  EmbeddingTable table(d);
  std::vector<double> vec(d);
  auto random_vector = [&] {
    for (double& x : vec) x = scale * standard_normal(rng);
    return vec;
  };
  for (const auto& [entity, syns] : lexicon.synonyms) {
    const std::vector<double> base = random_vector();
    table.insert(entity, base);
    for (const auto& s : syns) {
      for (const auto& tok : split(s)) {
        for (std::size_t j = 0; j < d; ++j) vec[j] = base[j] + 0.25 * scale * standard_normal(rng);
        table.insert(tok, vec);
      }
    }
  }
  NameSet words;
  for (const auto* list : {&kInform, &kInformTwo, &kDeny, &kChange, &kDontCare, &kAnswer,
                           &kAnything, &kYes, &kNo, &kNoInstead, &kPrefix, &kSuffix}) {
    for (const auto& text : *list) collect_words(text, words);
  }
  for (const auto& [slot, phrases] : kRequest) {
    for (const auto& text : phrases) collect_words(text, words);
  }
  words.insert("and");
  for (const auto& w : words) {
    if (!table.contains(w)) table.insert(w, random_vector());
  }

  SyntheticData data{ontology, dictionary, std::move(table), {}};
  Generator gen(data.ontology, lexicon, rng);
  for (std::size_t i = 0; i < config.dialogs; ++i) {
    const std::size_t turns =
        config.min_turns + uniform_index(rng, config.max_turns - config.min_turns + 1);
    data.dialogs.push_back(gen.dialog("syn-" + std::to_string(i), turns));
  }
  return data;
}

}  // namespace edst
