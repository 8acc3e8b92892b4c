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

#ifndef EDST_NEURAL_HPP_
#define EDST_NEURAL_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "edst/matrix.hpp"

namespace edst {

// Every random draw in the library comes from this engine. Distributions are
// implemented here rather than with <random> adaptors so that streams are
// identical across standard libraries.
using Rng = std::mt19937_64;

double uniform01(Rng& rng);                          // [0, 1)
double uniform(Rng& rng, double lo, double hi);      // [lo, hi)
std::size_t uniform_index(Rng& rng, std::size_t n);  // [0, n)
double standard_normal(Rng& rng);

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[uniform_index(rng, i)]);
  }
}

double sigmoid(double x);
void softmax_inplace(std::span<double> logits);

// Convolutional extractor over window sizes 1, 2 and 3. weights[n-1] holds L
// filters of n rows each, flattened row-major (L x n*width).
struct CnnParams {
  std::size_t width = 0;
  std::size_t filters = 0;
  std::array<Matrix, 3> weights;
  std::array<std::vector<double>, 3> bias;
};

CnnParams make_cnn(std::size_t width, std::size_t filters);
void init_cnn(CnnParams& params, Rng& rng);

struct CnnTrace {
  std::array<std::vector<std::size_t>, 3> argmax;  // window start per filter
  std::array<std::vector<double>, 3> peak;          // pre-ReLU maximum
};

// ReLU then max-pool per filter; output is [window 1 | window 2 | window 3],
// 3L long. Throws ShapeError on width mismatch or fewer than three rows.
std::vector<double> cnn_extract(const CnnParams& params, const Matrix& input,
                                CnnTrace* trace = nullptr);

// Accumulates parameter gradients into `grads`. When `column_grad` is
// non-empty it receives d loss / d input(:, column).
void cnn_backward(const CnnParams& params, const Matrix& input, const CnnTrace& trace,
                  std::span<const double> grad_out, CnnParams& grads, std::size_t column,
                  std::span<double> column_grad);

enum class HeadKind : std::uint8_t { kSigmoid, kSoftmax };

// One-hidden-layer network whose hidden layer is as wide as its input.
struct MlpParams {
  std::size_t in = 0;
  std::size_t out = 0;
  HeadKind kind = HeadKind::kSoftmax;
  Matrix hidden_w;  // in x in
  std::vector<double> hidden_b;
  Matrix out_w;  // out x in
  std::vector<double> out_b;
};

MlpParams make_mlp(std::size_t in, std::size_t out, HeadKind kind);
void init_mlp(MlpParams& params, Rng& rng);

// Half-open span of input columns that may be non-zero.
struct ColumnRange {
  std::size_t begin;
  std::size_t end;
};

struct MlpTrace {
  std::vector<double> hidden;  // sigmoid activations
  std::vector<double> kept;    // after dropout
  std::vector<double> scale;   // per-unit dropout factor, empty when off
  std::vector<double> output;
};

// Inference: hidden = sigmoid(W x + b), output = head(W' hidden + b').
std::vector<double> mlp_apply(const MlpParams& params, std::span<const double> x);

// Training-capable forward. Inputs outside `active` must be zero and are
// skipped; dropout on the hidden layer when `dropout_rng` is set.
std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> x,
                                std::span<const ColumnRange> active, double dropout_rate,
                                Rng* dropout_rng, MlpTrace& trace);

// grad_logits is d loss / d pre-activation output. Writes d loss / d x into
// `grad_x` over the active ranges only (when grad_x is non-empty).
void mlp_backward(const MlpParams& params, std::span<const double> x,
                  std::span<const ColumnRange> active, const MlpTrace& trace,
                  std::span<const double> grad_logits, MlpParams& grads, std::span<double> grad_x);

// h = f1 * gate(c); r_i = f2[i] * c; returns h | r_1 | ... | r_6, or just the
// r blocks when f1 is empty.
std::vector<double> assemble_vst_input(std::span<const double> f1, const std::array<double, 6>& f2,
                                       std::span<const double> c, const MlpParams& gate);

// -log max(pred[gold], 1e-12).
double cross_entropy(std::span<const double> pred, std::size_t gold);

// Inverted dropout; identity when not training or rate is zero.
std::vector<double> dropout(std::span<const double> x, double rate, Rng& rng, bool training);

// Named view of one flat parameter array.
struct ParamRef {
  std::string name;
  std::span<double> data;
};

double global_norm(std::span<const ParamRef> grads);

// Scales all gradients by max_norm / norm when the global L2 norm exceeds
// max_norm. Returns the norm before clipping.
double clip_global_norm(std::span<const ParamRef> grads, double max_norm = 5.0);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(AdamConfig config) : config_(config) {}

  void step(std::span<const ParamRef> params, std::span<const ParamRef> grads);
  std::uint64_t steps() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

struct GradCheckReport {
  struct Group {
    std::string name;
    std::size_t size = 0;
    double max_rel_error = 0.0;
  };
  std::vector<Group> groups;

  double max_rel_error() const;
};

// Compares analytic gradients against central differences with step h.
// Relative error is |a - n| / max(|a|, |n|, floor). `loss` reads the
// parameters through the same spans that `params` exposes.
GradCheckReport check_gradients(std::span<const ParamRef> params,
                                std::span<const ParamRef> analytic,
                                const std::function<double()>& loss, double h = 1e-5,
                                double floor = 1e-6);

}  // namespace edst

#endif  // EDST_NEURAL_HPP_
