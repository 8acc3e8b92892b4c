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

#ifndef EDST_TEMPLATES_HPP_
#define EDST_TEMPLATES_HPP_

#include <string>
#include <utility>
#include <vector>

#include "edst/corpus.hpp"
#include "edst/features.hpp"
#include "edst/metrics.hpp"
#include "edst/state.hpp"

namespace edst {

// An utterance with value mentions replaced by "<slot>" and slot-name
// mentions by "[slot]". Mentions keep their order of appearance.
struct Delexicalised {
  std::vector<std::string> tokens;
  std::vector<std::pair<std::string, std::string>> mentions;  // (slot, value)
};

// Greedy left-to-right, longest match first, over value names, slot names
// and their dictionary synonyms.
Delexicalised delexicalise(const Utterance& utterance, const Ontology& ontology,
                           const SemanticDictionary* dictionary);

struct Template {
  std::vector<std::string> pattern;
  std::vector<ValueLabel> labels;  // one per value placeholder, in order
  NameSet dont_care;
  NameSet requested;
  bool operator==(const Template&) const = default;
};

struct TemplateSet {
  std::vector<Template> templates;

  Json to_json() const;
  static TemplateSet from_json(const Json& json, const Ontology& ontology);
};

// Patterns from turn-level labels. An utterance is skipped when a labelled
// value is not mentioned in it, or when it carries no value mention, no
// dont-care and no request. Identical templates are kept once.
TemplateSet extract_templates(const std::vector<Dialog>& dialogs, const Ontology& ontology,
                              const SemanticDictionary* dictionary);

// 1 - token edit distance / longer length; 1 for two empty sequences.
double token_similarity(const std::vector<std::string>& a, const std::vector<std::string>& b);

inline constexpr double kTemplateThreshold = 0.8;

// Turn-level prediction from the most similar template (earliest on ties);
// all NOT_MENTIONED when the best similarity is below `threshold`.
StateAssignment template_track(const TemplateSet& templates, const Ontology& ontology,
                               const SemanticDictionary* dictionary, const Utterance& utterance,
                               double threshold = kTemplateThreshold);

// Per-turn predictions accumulated across each dialog, then scored.
Metrics evaluate_templates(const TemplateSet& templates, const Ontology& ontology,
                           const SemanticDictionary* dictionary,
                           const std::vector<Dialog>& dialogs,
                           double threshold = kTemplateThreshold);

}  // namespace edst

#endif  // EDST_TEMPLATES_HPP_
