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

#include "edst/head.hpp"

#include <algorithm>
#include <cmath>

#include "edst/error.hpp"

namespace edst {

namespace {

struct HeadTrace {
  Matrix features;
  std::vector<double> xdot;
  CnnTrace cnn;
  std::vector<double> summary_scale;  // dropout factors on the CNN summary
  std::vector<double> summary;        // after dropout
  MlpTrace gate;
  std::vector<double> assembled;
  std::vector<ColumnRange> active;
  MlpTrace out;
};

std::vector<double> forward(const HeadConfig& cfg, const HeadParams& p, const FeatureInput& in,
                            Rng* rng, HeadTrace& t) {
  const std::size_t d = cfg.word_dim;
  const Matrix& words = *in.words;
  if (words.cols != d) {
    throw ShapeError("head expects " + std::to_string(d) + "-dim words, got " +
                     std::to_string(words.cols));
  }
  if (in.belief.size() != cfg.belief_dim) {
    throw ShapeError("head expects a " + std::to_string(cfg.belief_dim) +
                     "-dim belief vector, got " + std::to_string(in.belief.size()));
  }
  const std::size_t rows = words.rows;
  t.features = Matrix(rows, d + 2);
  t.xdot.assign(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    std::copy(words.row(i).begin(), words.row(i).end(), t.features.row(i).begin());
    if (cfg.value_specific && i < in.tokens) {
      t.xdot[i] = sigmoid(p.dot.w1 * in.dots[i] + p.dot.b1);
      t.features(i, d) = t.xdot[i];
      t.features(i, d + 1) = in.string_match[i];
    }
  }

  t.summary = cnn_extract(p.cnn, t.features, &t.cnn);
  t.summary_scale.clear();
  if (rng != nullptr && cfg.dropout > 0.0) {
    const double keep = 1.0 / (1.0 - cfg.dropout);
    t.summary_scale.resize(t.summary.size());
    for (std::size_t k = 0; k < t.summary.size(); ++k) {
      t.summary_scale[k] = uniform01(*rng) < cfg.dropout ? 0.0 : keep;
      t.summary[k] *= t.summary_scale[k];
    }
  }

  const std::size_t S = cfg.summary_dim();
  const std::size_t B = cfg.belief_dim;
  t.assembled.assign(cfg.input_dim(), 0.0);
  t.active.clear();
  if (B > 0) {
    const ColumnRange all{0, S};
    const auto g = mlp_forward(p.gate, t.summary, std::span<const ColumnRange>(&all, 1),
                               cfg.dropout, rng, t.gate);
    for (std::size_t i = 0; i < B; ++i) t.assembled[i] = in.belief[i] * g[i];
    t.active.push_back({0, B});
  }
  if (cfg.act_gates) {
    for (std::size_t a = 0; a < 6; ++a) {
      if (in.acts[a] == 0.0) continue;
      const std::size_t base = B + a * S;
      for (std::size_t k = 0; k < S; ++k) t.assembled[base + k] = in.acts[a] * t.summary[k];
      t.active.push_back({base, base + S});
    }
  } else {
    std::copy(t.summary.begin(), t.summary.end(), t.assembled.begin() + B);
    t.active.push_back({B, B + S});
  }
  return mlp_forward(p.out, t.assembled, t.active, cfg.dropout, rng, t.out);
}

}  // namespace

HeadParams make_head(const HeadConfig& config) {
  HeadParams p;
  p.cnn = make_cnn(config.feature_width(), config.filters);
  if (config.belief_dim > 0) {
    p.gate = make_mlp(config.summary_dim(), config.belief_dim, HeadKind::kSigmoid);
  }
  p.out = make_mlp(config.input_dim(), config.classes, HeadKind::kSoftmax);
  return p;
}

void init_head(HeadParams& params, const HeadConfig& config, Rng& rng) {
  params.dot = DotMatchParams{};
  init_cnn(params.cnn, rng);
  if (config.belief_dim > 0) init_mlp(params.gate, rng);
  init_mlp(params.out, rng);
}

std::vector<ParamRef> head_groups(HeadParams& p) {
  std::vector<ParamRef> g;
  g.push_back({"dot.w1", std::span<double>(&p.dot.w1, 1)});
  g.push_back({"dot.b1", std::span<double>(&p.dot.b1, 1)});
  for (std::size_t n = 1; n <= 3; ++n) {
    g.push_back({"cnn.w" + std::to_string(n), p.cnn.weights[n - 1].data});
    g.push_back({"cnn.b" + std::to_string(n), p.cnn.bias[n - 1]});
  }
  if (p.gate.in > 0) {
    g.push_back({"gate.hidden_w", p.gate.hidden_w.data});
    g.push_back({"gate.hidden_b", p.gate.hidden_b});
    g.push_back({"gate.out_w", p.gate.out_w.data});
    g.push_back({"gate.out_b", p.gate.out_b});
  }
  g.push_back({"out.hidden_w", p.out.hidden_w.data});
  g.push_back({"out.hidden_b", p.out.hidden_b});
  g.push_back({"out.out_w", p.out.out_w.data});
  g.push_back({"out.out_b", p.out.out_b});
  return g;
}

void zero_head(HeadParams& params) {
  for (auto& g : head_groups(params)) std::fill(g.data.begin(), g.data.end(), 0.0);
}

std::vector<double> head_predict(const HeadConfig& config, const HeadParams& params,
                                 const FeatureInput& input) {
  HeadTrace trace;
  return forward(config, params, input, nullptr, trace);
}

double head_loss(const HeadConfig& config, const HeadParams& params, const FeatureInput& input,
                 std::size_t gold) {
  return cross_entropy(head_predict(config, params, input), gold);
}

double head_loss_gradient(const HeadConfig& cfg, const HeadParams& p, const FeatureInput& in,
                          std::size_t gold, HeadParams& grads, Rng* dropout_rng) {
  if (gold >= cfg.classes) throw ArgumentError("gold label index out of range");
  HeadTrace t;
  const auto probs = forward(cfg, p, in, dropout_rng, t);
  const double loss = cross_entropy(probs, gold);

  std::vector<double> grad_logits = probs;
  grad_logits[gold] -= 1.0;
  std::vector<double> grad_x(cfg.input_dim(), 0.0);
  mlp_backward(p.out, t.assembled, t.active, t.out, grad_logits, grads.out, grad_x);

  const std::size_t S = cfg.summary_dim();
  const std::size_t B = cfg.belief_dim;
  std::vector<double> grad_summary(S, 0.0);
  if (cfg.act_gates) {
    for (std::size_t a = 0; a < 6; ++a) {
      if (in.acts[a] == 0.0) continue;
      const std::size_t base = B + a * S;
      for (std::size_t k = 0; k < S; ++k) grad_summary[k] += in.acts[a] * grad_x[base + k];
    }
  } else {
    for (std::size_t k = 0; k < S; ++k) grad_summary[k] = grad_x[B + k];
  }
  if (B > 0) {
    std::vector<double> grad_gate(B);
    for (std::size_t i = 0; i < B; ++i) {
      const double g = t.gate.output[i];
      grad_gate[i] = grad_x[i] * in.belief[i] * g * (1.0 - g);
    }
    std::vector<double> grad_from_gate(S, 0.0);
    const ColumnRange all{0, S};
    mlp_backward(p.gate, t.summary, std::span<const ColumnRange>(&all, 1), t.gate, grad_gate,
                 grads.gate, grad_from_gate);
    for (std::size_t k = 0; k < S; ++k) grad_summary[k] += grad_from_gate[k];
  }
  if (!t.summary_scale.empty()) {
    for (std::size_t k = 0; k < S; ++k) grad_summary[k] *= t.summary_scale[k];
  }

  std::vector<double> grad_xdot;
  if (cfg.value_specific) grad_xdot.assign(t.features.rows, 0.0);
  cnn_backward(p.cnn, t.features, t.cnn, grad_summary, grads.cnn, cfg.word_dim, grad_xdot);
  if (cfg.value_specific) {
    for (std::size_t i = 0; i < in.tokens; ++i) {
      const double s = t.xdot[i];
      const double g = grad_xdot[i] * s * (1.0 - s);
      grads.dot.w1 += g * in.dots[i];
      grads.dot.b1 += g;
    }
  }
  return loss;
}

GradCheckReport head_gradient_check(const HeadConfig& config, std::uint64_t seed,
                                    std::size_t tokens, double h) {
  Rng rng(seed);
  HeadParams params = make_head(config);
  init_head(params, config, rng);
  // Off-default dot parameters so that both are exercised away from w1=1, b1=0.
  params.dot.w1 = uniform(rng, 0.5, 1.5);
  params.dot.b1 = uniform(rng, -0.5, 0.5);

  FeatureInput input;
  input.tokens = tokens;
  auto words = std::make_shared<Matrix>(feature_rows(tokens), config.word_dim);
  for (std::size_t i = 0; i < tokens; ++i) {
    for (double& x : words->row(i)) x = standard_normal(rng);
  }
  std::vector<double> entity(config.word_dim);
  for (double& x : entity) x = standard_normal(rng) / std::sqrt(double(config.word_dim));
  input.dots.assign(words->rows, 0.0);
  input.string_match.assign(words->rows, 0.0);
  for (std::size_t i = 0; i < tokens; ++i) {
    for (std::size_t j = 0; j < config.word_dim; ++j) input.dots[i] += (*words)(i, j) * entity[j];
    input.string_match[i] = uniform01(rng) < 0.3 ? 1.0 : 0.0;
  }
  input.words = words;
  if (config.belief_dim > 0) {
    double sum = 0.0;
    input.belief.resize(config.belief_dim);
    for (double& b : input.belief) sum += (b = uniform(rng, 0.05, 1.0));
    for (double& b : input.belief) b /= sum;
  }
  // Two active indicators, so the shared CNN summary feeds several blocks.
  input.acts = {1, 0, 1, 0, 0, 0};
  const std::size_t gold = uniform_index(rng, config.classes);

  HeadParams grads = make_head(config);
  zero_head(grads);
  head_loss_gradient(config, params, input, gold, grads, nullptr);
  const auto param_groups = head_groups(params);
  const auto grad_groups = head_groups(grads);
  return check_gradients(param_groups, grad_groups,
                         [&] { return head_loss(config, params, input, gold); }, h);
}

}  // namespace edst
