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

#include "edst/tracker.hpp"

#include <algorithm>

#include "edst/error.hpp"

namespace edst {

std::string_view to_string(LabelScheme scheme) {
  return scheme == LabelScheme::kEnriched3 ? "enriched3" : "mention2";
}

LabelScheme parse_label_scheme(std::string_view text) {
  if (text == "enriched3") return LabelScheme::kEnriched3;
  if (text == "mention2") return LabelScheme::kMention2;
  throw ArgumentError("unknown label scheme '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// TrackerModel

TrackerModel::TrackerModel(Ontology ontology, std::shared_ptr<const EmbeddingTable> embeddings,
                           std::optional<SemanticDictionary> dictionary, TrackerMode mode,
                           std::size_t filters)
    : ontology_(std::move(ontology)),
      embeddings_(std::move(embeddings)),
      dictionary_(std::move(dictionary)),
      mode_(mode),
      filters_(filters) {
  if (!embeddings_ || embeddings_->dim() == 0) {
    throw ArgumentError("tracker needs a non-empty embedding table");
  }
  if (filters_ == 0) throw ArgumentError("tracker needs at least one CNN filter");
  if (dictionary_) dictionary_->check(ontology_);
  for (std::size_t i = 0; i < ontology_.informable().size(); ++i) {
    value_heads_.push_back(make_head(value_config()));
    slot_heads_.push_back(make_head(slot_config()));
  }
  for (std::size_t i = 0; i < ontology_.requestable().size(); ++i) {
    request_heads_.push_back(make_head(request_config()));
  }
}

void TrackerModel::initialize(Rng& rng) {
  const HeadConfig vc = value_config();
  const HeadConfig sc = slot_config();
  const HeadConfig rc = request_config();
  for (auto& h : value_heads_) init_head(h, vc, rng);
  for (auto& h : slot_heads_) init_head(h, sc, rng);
  for (auto& h : request_heads_) init_head(h, rc, rng);
}

std::size_t TrackerModel::value_classes() const {
  return mode_.labels == LabelScheme::kEnriched3 ? 3 : 2;
}

HeadConfig TrackerModel::value_config() const {
  HeadConfig c;
  c.word_dim = embeddings_->dim();
  c.filters = filters_;
  c.belief_dim = mode_.use_prev_belief ? value_classes() : 0;
  c.act_gates = true;
  c.classes = value_classes();
  c.value_specific = !mode_.ablate_value_specific;
  return c;
}

HeadConfig TrackerModel::slot_config() const {
  HeadConfig c = value_config();
  c.belief_dim = mode_.use_prev_belief ? kNumSlotLabels : 0;
  c.classes = 2;
  return c;
}

HeadConfig TrackerModel::request_config() const {
  HeadConfig c = value_config();
  c.belief_dim = 0;
  c.act_gates = false;
  c.classes = 2;
  return c;
}

std::size_t TrackerModel::informable_index(std::string_view slot) const {
  const auto& inf = ontology_.informable();
  for (std::size_t i = 0; i < inf.size(); ++i) {
    if (inf[i].name == slot) return i;
  }
  throw ArgumentError("unknown informable slot '" + std::string(slot) + "'");
}

std::size_t TrackerModel::requestable_index(std::string_view slot) const {
  const auto& req = ontology_.requestable();
  for (std::size_t i = 0; i < req.size(); ++i) {
    if (req[i] == slot) return i;
  }
  throw ArgumentError("unknown requestable slot '" + std::string(slot) + "'");
}

HeadParams& TrackerModel::value_head(std::string_view slot) {
  return value_heads_[informable_index(slot)];
}
const HeadParams& TrackerModel::value_head(std::string_view slot) const {
  return value_heads_[informable_index(slot)];
}
HeadParams& TrackerModel::slot_head(std::string_view slot) {
  return slot_heads_[informable_index(slot)];
}
const HeadParams& TrackerModel::slot_head(std::string_view slot) const {
  return slot_heads_[informable_index(slot)];
}
HeadParams& TrackerModel::request_head(std::string_view slot) {
  return request_heads_[requestable_index(slot)];
}
const HeadParams& TrackerModel::request_head(std::string_view slot) const {
  return request_heads_[requestable_index(slot)];
}

FeatureInput TrackerModel::value_input(const UtteranceFeatures& utterance, std::string_view slot,
                                       std::string_view value, const SystemAct& act,
                                       std::vector<double> belief) const {
  FeatureInput in = utterance.for_entity(value, dictionary(), *embeddings_);
  in.belief = std::move(belief);
  in.acts = act_feature_vector(slot, value, act);
  return in;
}

FeatureInput TrackerModel::slot_input(const UtteranceFeatures& utterance, std::string_view slot,
                                      const SystemAct& act, std::vector<double> belief) const {
  FeatureInput in = utterance.for_entity(slot, dictionary(), *embeddings_);
  in.belief = std::move(belief);
  in.acts = slot_act_feature_vector(slot, act);
  return in;
}

FeatureInput TrackerModel::request_input(const UtteranceFeatures& utterance,
                                         std::string_view slot) const {
  return utterance.for_entity(slot, dictionary(), *embeddings_);
}

// ---------------------------------------------------------------------------
// Per-head updates

ValueDist to_value_dist(std::span<const double> probs, LabelScheme scheme) {
  if (scheme == LabelScheme::kMention2) return {probs[0], 0.0, probs[1]};
  return {probs[0], probs[1], probs[2]};
}

namespace {

ValueDist value_update(const TrackerModel& model, const UtteranceFeatures& uf,
                       std::string_view slot, std::string_view value, const SystemAct& act,
                       const BeliefState& belief) {
  std::vector<double> f1;
  if (model.mode().use_prev_belief) {
    f1 = value_belief_vector(belief, slot, value, model.mode().labels);
  }
  const auto probs = head_predict(model.value_config(), model.value_head(slot),
                                  model.value_input(uf, slot, value, act, std::move(f1)));
  return to_value_dist(probs, model.mode().labels);
}

SlotCond free_branch(const TrackerModel& model, const UtteranceFeatures& uf,
                     std::string_view slot, const SystemAct& act, const BeliefState& belief) {
  std::vector<double> f1;
  if (model.mode().use_prev_belief) f1 = slot_belief_vector(belief, slot);
  const auto probs = head_predict(model.slot_config(), model.slot_head(slot),
                                  model.slot_input(uf, slot, act, std::move(f1)));
  return {probs[0], probs[1]};
}

}  // namespace

ValueDist vst_update(const TrackerModel& model, std::string_view slot, std::string_view value,
                     const TurnInput& turn, const BeliefState& belief) {
  if (!model.ontology().has_value(slot, value)) {
    throw ArgumentError("unknown value '" + std::string(value) + "' for slot '" +
                        std::string(slot) + "'");
  }
  const UtteranceFeatures uf(turn.user, model.embeddings());
  return value_update(model, uf, slot, value, turn.system_act, belief);
}

SlotCond sst_free_branch(const TrackerModel& model, std::string_view slot, const TurnInput& turn,
                         const BeliefState& belief) {
  model.ontology().slot(slot);
  const UtteranceFeatures uf(turn.user, model.embeddings());
  return free_branch(model, uf, slot, turn.system_act, belief);
}

std::array<double, kNumSlotLabels> sst_update(const TrackerModel& model, std::string_view slot,
                                              const TurnInput& turn, const BeliefState& belief,
                                              const NameMap<ValueLabel>& eta_map) {
  if (slot_label_constraint(eta_map) == SlotConstraint::kForcedMentioned) return {0.0, 1.0, 0.0};
  const SlotCond cond = sst_free_branch(model, slot, turn, belief);
  return {cond[0], 0.0, cond[1]};
}

double requestable_update(const TrackerModel& model, std::string_view slot,
                          const Utterance& utterance) {
  const UtteranceFeatures uf(utterance, model.embeddings());
  return head_predict(model.request_config(), model.request_head(slot),
                      model.request_input(uf, slot))[0];
}

// ---------------------------------------------------------------------------
// Turns and dialogs

StateAssignment TurnResult::decode(const Ontology& ontology) const {
  StateAssignment a = map_assignment(belief, ontology);
  for (const auto& [slot, p] : requested) {
    if (p >= 0.5) a.requested.insert(slot);
  }
  return a;
}

TurnResult track_turn(const TrackerModel& model, const TurnInput& turn, const BeliefState& belief) {
  const Ontology& ontology = model.ontology();
  const UtteranceFeatures uf(turn.user, model.embeddings());
  TurnResult result;
  for (const auto& s : ontology.informable()) {
    auto& dists = result.belief.value_dists[s.name];
    for (const auto& v : s.values) {
      dists[v] = value_update(model, uf, s.name, v, turn.system_act, belief);
    }
    result.belief.slot_conds[s.name] = free_branch(model, uf, s.name, turn.system_act, belief);
  }
  for (const auto& r : ontology.requestable()) {
    result.requested[r] = head_predict(model.request_config(), model.request_head(r),
                                       model.request_input(uf, r))[0];
  }
  return result;
}

TurnResult track_turn_asr(const TrackerModel& model, const TurnInput& turn,
                          const BeliefState& belief) {
  if (!turn.asr || turn.asr->empty()) throw ArgumentError("turn has no ASR hypotheses");
  double total = 0.0;
  for (const auto& h : *turn.asr) {
    if (!(h.score >= 0.0)) throw ArgumentError("ASR posteriors must be non-negative");
    total += h.score;
  }
  if (!(total > 0.0)) throw ArgumentError("ASR posteriors sum to zero");

  TurnResult mixed;
  for (const auto& s : model.ontology().informable()) {
    auto& dists = mixed.belief.value_dists[s.name];
    for (const auto& v : s.values) dists[v] = {0.0, 0.0, 0.0};
    mixed.belief.slot_conds[s.name] = {0.0, 0.0};
  }
  for (const auto& r : model.ontology().requestable()) mixed.requested[r] = 0.0;

  TurnInput hyp_turn;
  hyp_turn.system_act = turn.system_act;
  for (const auto& h : *turn.asr) {
    const double w = h.score / total;
    if (w == 0.0) continue;
    hyp_turn.user = h.utterance;
    const TurnResult r = track_turn(model, hyp_turn, belief);
    for (auto& [slot, dists] : mixed.belief.value_dists) {
      const auto& src = r.belief.value_dists.at(slot);
      for (auto& [value, p] : dists) {
        const auto& q = src.at(value);
        for (std::size_t k = 0; k < p.size(); ++k) p[k] += w * q[k];
      }
      auto& cond = mixed.belief.slot_conds.at(slot);
      const auto& src_cond = r.belief.slot_conds.at(slot);
      cond[0] += w * src_cond[0];
      cond[1] += w * src_cond[1];
    }
    for (auto& [slot, p] : mixed.requested) p += w * r.requested.at(slot);
  }
  return mixed;
}

DialogTrace track_dialog_trace(const TrackerModel& model, std::span<const TurnInput> turns,
                               bool use_asr) {
  const Ontology& ontology = model.ontology();
  DialogTrace trace;
  auto run = [&](const TurnInput& turn, const BeliefState& belief) {
    if (use_asr && turn.asr && !turn.asr->empty()) return track_turn_asr(model, turn, belief);
    return track_turn(model, turn, belief);
  };
  if (model.mode().use_prev_belief) {
    BeliefState belief = new_belief_state(ontology);
    for (const auto& turn : turns) {
      TurnResult r = run(turn, belief);
      trace.states.push_back(r.decode(ontology));
      belief = std::move(r.belief);
    }
  } else {
    const BeliefState prior = new_belief_state(ontology);
    StateAssignment state = neutral_assignment(ontology);
    for (const auto& turn : turns) {
      StateAssignment prediction = run(turn, prior).decode(ontology);
      state = accumulate_turn(state, prediction, ontology);
      trace.turn_predictions.push_back(std::move(prediction));
      trace.states.push_back(state);
    }
  }
  return trace;
}

std::vector<StateAssignment> track_dialog(const TrackerModel& model,
                                          std::span<const TurnInput> turns, bool use_asr) {
  return track_dialog_trace(model, turns, use_asr).states;
}

SlotDecision single_value_decode(const std::vector<std::pair<std::string, double>>& mentioned,
                                 const SlotCond& free_branch) {
  SlotDecision d;
  double best = -1.0;
  for (const auto& [value, p] : mentioned) {
    if (p > best) {
      best = p;
      d.kind = SlotDecision::Kind::kValue;
      d.value = value;
    }
  }
  if (d.kind == SlotDecision::Kind::kValue) return d;
  d.kind = free_branch[0] >= free_branch[1] ? SlotDecision::Kind::kDontCare
                                            : SlotDecision::Kind::kNone;
  return d;
}

}  // namespace edst
