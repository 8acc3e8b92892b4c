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

#ifndef EDST_TEXT_HPP_
#define EDST_TEXT_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace edst {

// Unicode NFC followed by full case folding. All token comparisons in the
// library go through this so that "Thriller" and "thriller" match.
std::string normalize_token(std::string_view token);

// Splits an ontology entity name ("price range", "Film_name") into
// normalized tokens. Separators are ASCII whitespace and '_'.
std::vector<std::string> entity_tokens(std::string_view name);

std::vector<std::string> normalize_tokens(const std::vector<std::string>& tokens);

// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace edst

#endif  // EDST_TEXT_HPP_
