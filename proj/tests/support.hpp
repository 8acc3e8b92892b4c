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

#ifndef EDST_TESTS_SUPPORT_HPP_
#define EDST_TESTS_SUPPORT_HPP_

#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "edst/features.hpp"
#include "edst/neural.hpp"
#include "edst/state.hpp"
#include "edst/tracker.hpp"

namespace edst::test {

inline std::string fixture(const std::string& name) {
  return std::string(EDST_FIXTURE_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Utterance utt(std::initializer_list<const char*> words) {
  Utterance u;
  for (const char* w : words) u.tokens.emplace_back(w);
  return u;
}

// genre: thriller comedy drama; country: us france; requestable genre, length.
inline Ontology small_ontology(NameSet single_value = {}) {
  return Ontology({{"genre", {"thriller", "comedy", "drama"}}, {"country", {"us", "france"}}},
                  {"genre", "length"}, std::move(single_value));
}

// A normalized distribution of n entries drawn from the generator.
template <std::size_t N>
std::array<double, N> random_dist(Rng& rng) {
  std::array<double, N> p{};
  double total = 0.0;
  for (double& x : p) {
    x = uniform01(rng) + 1e-3;
    total += x;
  }
  for (double& x : p) x /= total;
  return p;
}

inline BeliefState random_belief(const Ontology& ontology, Rng& rng) {
  BeliefState b = new_belief_state(ontology);
  for (auto& [slot, values] : b.value_dists) {
    for (auto& [value, p] : values) p = random_dist<3>(rng);
  }
  for (auto& [slot, cond] : b.slot_conds) cond = random_dist<2>(rng);
  return b;
}

// Four-dimensional table covering the words used across the unit tests.
inline std::shared_ptr<EmbeddingTable> small_embeddings() {
  auto table = std::make_shared<EmbeddingTable>(4);
  Rng rng(11);
  for (const char* w : {"i", "want", "a", "thriller", "comedy", "drama", "us", "france", "genre",
                        "length", "country", "scary", "movie", "how", "long", "is", "it", "no",
                        "funny", "any", "fine", "what", "please"}) {
    std::vector<double> v(4);
    for (double& x : v) x = standard_normal(rng) * 0.5;
    table->insert(w, v);
  }
  return table;
}

// Sets every head to fire on the string-match column of its own entity:
// values named in the utterance come out LIKE (MENTIONED), slot names yield
// DONT_CARE and requestable names yield "requested". Everything else decodes
// to NOT_MENTIONED.
inline void wire_string_match(TrackerModel& model) {
  auto wire = [](HeadParams& h, const HeadConfig& cfg) {
    const std::size_t d = cfg.word_dim;
    const std::size_t s = cfg.summary_dim();
    h.cnn.weights[0](0, d + 1) = 10.0;
    const std::size_t blocks = cfg.act_gates ? 6 : 1;
    for (std::size_t b = 0; b < blocks; ++b) h.out.hidden_w(0, cfg.belief_dim + b * s) = 1.0;
    h.out.hidden_b[0] = -5.0;
    h.out.out_w(0, 0) = 20.0;
    h.out.out_b[0] = -10.0;
    h.out.out_b[cfg.classes - 1] = 1.0;
  };
  for (const auto& s : model.ontology().informable()) {
    wire(model.value_head(s.name), model.value_config());
    wire(model.slot_head(s.name), model.slot_config());
  }
  for (const auto& r : model.ontology().requestable()) {
    wire(model.request_head(r), model.request_config());
  }
}

inline TrackerModel wired_model(TrackerMode mode, std::size_t filters = 2) {
  TrackerModel model(small_ontology(), small_embeddings(), std::nullopt, mode, filters);
  wire_string_match(model);
  return model;
}

}  // namespace edst::test

#endif  // EDST_TESTS_SUPPORT_HPP_
