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

#ifndef EDST_ADAPTERS_HPP_
#define EDST_ADAPTERS_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "edst/corpus.hpp"

namespace edst {

struct ConversionReport {
  std::size_t dialogs = 0;
  std::size_t turns = 0;
  std::size_t skipped_labels = 0;  // labels naming values outside the ontology
  std::size_t skipped_acts = 0;
};

struct WozOptions {
  bool keep_asr = true;  // copy N-best lists when the source has them
};

// Lower-cases and splits on whitespace, detaching . , ? ! as tokens.
std::vector<std::string> simple_tokenize(const std::string& text);

// Converts WOZ 2.0 / DSTC2 dialogs in the list-of-dialogues JSON layout
// ("dialogue_idx", "dialogue": [{"system_acts", "transcript", "asr",
// "turn_label", "belief_state"}]). System acts that are bare slot names become
// requests, [slot, value] pairs become like-confirms. A "dontcare" value maps
// to the slot-level DONT_CARE label and "request" labels to requested slots.
std::vector<Dialog> convert_woz(const Json& source, const Ontology& ontology,
                                const WozOptions& options, ConversionReport& report);

}  // namespace edst

#endif  // EDST_ADAPTERS_HPP_
