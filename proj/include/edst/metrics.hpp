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

#ifndef EDST_METRICS_HPP_
#define EDST_METRICS_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include "edst/corpus.hpp"
#include "edst/state.hpp"
#include "edst/tracker.hpp"

namespace edst {

struct Metrics {
  // Absent when no turn-level predictions or gold are available.
  std::optional<double> turn_goal;
  double joint_goal = 0.0;
  double request = 0.0;
  // Per informable slot: fraction of turns whose accumulated slot label and
  // value labels all match.
  NameMap<double> per_slot;
  std::size_t turns = 0;

  Json to_json() const;
};

// Exact match of every informable slot label and value label.
bool goal_match(const StateAssignment& predicted, const StateAssignment& gold,
                const Ontology& ontology);
bool slot_match(const StateAssignment& predicted, const StateAssignment& gold,
                const Ontology::Slot& slot);

// Scores one prediction trace per dialog. Throws DataError when gold labels
// needed for the accumulated metrics are missing, ArgumentError when traces
// and dialogs disagree in length.
Metrics score(const std::vector<Dialog>& dialogs, const std::vector<DialogTrace>& traces,
              const Ontology& ontology);

Metrics evaluate(const TrackerModel& model, const std::vector<Dialog>& dialogs,
                 bool use_asr = false);

}  // namespace edst

#endif  // EDST_METRICS_HPP_
