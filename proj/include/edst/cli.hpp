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

#ifndef EDST_CLI_HPP_
#define EDST_CLI_HPP_

#include <iosfwd>
#include <string>

#include "edst/tracker.hpp"

namespace edst {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

// Entry point of the edst tool. Errors go to `err` with the exit code above.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err);

// Line protocol of `edst track`: each input line is a turn object
// ({"system_acts", "user", "asr"?}) or `reset`; each answer is one JSON line
// with the belief, the decoded state and requested probabilities. A bad line
// yields {"error": ...} and leaves the session unchanged.
class TrackSession {
 public:
  explicit TrackSession(const TrackerModel& model);

  std::string process(const std::string& line);
  void reset();

  const BeliefState& belief() const { return belief_; }
  const StateAssignment& state() const { return state_; }

 private:
  const TrackerModel& model_;
  BeliefState belief_;
  StateAssignment state_;
};

Json belief_to_json(const BeliefState& belief);
Json assignment_to_json(const StateAssignment& assignment);

}  // namespace edst

#endif  // EDST_CLI_HPP_
