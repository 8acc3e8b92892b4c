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

#ifndef EDST_HEAD_HPP_
#define EDST_HEAD_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "edst/features.hpp"
#include "edst/neural.hpp"

namespace edst {

// Shape of one tracker head. The same network serves value heads (VST),
// slot free-branch heads (SST) and requestable heads; they differ only in
// belief_dim, act_gates and classes.
struct HeadConfig {
  std::size_t word_dim = 0;
  std::size_t filters = 50;
  std::size_t belief_dim = 0;  // 0 drops the gated belief path
  bool act_gates = true;       // false feeds the CNN summary straight in
  std::size_t classes = 3;
  bool value_specific = true;  // false zeroes the x_dot and x_str columns
  double dropout = 0.5;

  std::size_t feature_width() const { return word_dim + 2; }
  std::size_t summary_dim() const { return 3 * filters; }
  std::size_t input_dim() const { return belief_dim + (act_gates ? 6 : 1) * summary_dim(); }
  bool operator==(const HeadConfig&) const = default;
};

struct HeadParams {
  DotMatchParams dot;
  CnnParams cnn;
  MlpParams gate;  // sigmoid, summary_dim -> belief_dim; empty when belief_dim == 0
  MlpParams out;   // softmax, input_dim -> classes
};

// All-zero parameters of the right shapes (w1 = 1, b1 = 0).
HeadParams make_head(const HeadConfig& config);
void init_head(HeadParams& params, const HeadConfig& config, Rng& rng);

// Flat parameter arrays in their fixed serialization order.
std::vector<ParamRef> head_groups(HeadParams& params);
void zero_head(HeadParams& params);

// Class distribution for one input, dropout off.
std::vector<double> head_predict(const HeadConfig& config, const HeadParams& params,
                                 const FeatureInput& input);

// Forward with dropout drawn from `dropout_rng` (none when null), cross
// entropy against `gold`, and backward; gradients are added into `grads`.
double head_loss_gradient(const HeadConfig& config, const HeadParams& params,
                          const FeatureInput& input, std::size_t gold, HeadParams& grads,
                          Rng* dropout_rng);

double head_loss(const HeadConfig& config, const HeadParams& params, const FeatureInput& input,
                 std::size_t gold);

// Random head and random input of `tokens` words, checked against central
// differences for every parameter group.
GradCheckReport head_gradient_check(const HeadConfig& config, std::uint64_t seed,
                                    std::size_t tokens = 6, double h = 1e-5);

}  // namespace edst

#endif  // EDST_HEAD_HPP_
