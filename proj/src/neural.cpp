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

#include "edst/neural.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "edst/error.hpp"

namespace edst {

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

std::size_t uniform_index(Rng& rng, std::size_t n) {
  if (n == 0) throw ArgumentError("uniform_index over an empty range");
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

double standard_normal(Rng& rng) {
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void softmax_inplace(std::span<double> logits) {
  if (logits.empty()) return;
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& z : logits) {
    z = std::exp(z - top);
    sum += z;
  }
  for (double& z : logits) z /= sum;
}

namespace {

void glorot(std::span<double> w, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& x : w) x = uniform(rng, -limit, limit);
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

// ---------------------------------------------------------------------------
// CNN

CnnParams make_cnn(std::size_t width, std::size_t filters) {
  CnnParams p;
  p.width = width;
  p.filters = filters;
  for (std::size_t n = 1; n <= 3; ++n) {
    p.weights[n - 1] = Matrix(filters, n * width);
    p.bias[n - 1].assign(filters, 0.0);
  }
  return p;
}

void init_cnn(CnnParams& params, Rng& rng) {
  for (std::size_t n = 1; n <= 3; ++n) {
    glorot(params.weights[n - 1].data, n * params.width, params.filters, rng);
    std::fill(params.bias[n - 1].begin(), params.bias[n - 1].end(), 0.0);
  }
}

std::vector<double> cnn_extract(const CnnParams& params, const Matrix& input, CnnTrace* trace) {
  if (input.cols != params.width) {
    throw ShapeError("cnn input has " + std::to_string(input.cols) + " columns, expected " +
                     std::to_string(params.width));
  }
  if (input.rows < 3) {
    throw ShapeError("cnn input needs at least 3 rows, got " + std::to_string(input.rows));
  }
  const std::size_t L = params.filters;
  std::vector<double> out(3 * L, 0.0);
  for (std::size_t n = 1; n <= 3; ++n) {
    const Matrix& w = params.weights[n - 1];
    const std::size_t span = n * params.width;
    const std::size_t windows = input.rows - n + 1;
    if (trace != nullptr) {
      trace->argmax[n - 1].assign(L, 0);
      trace->peak[n - 1].assign(L, 0.0);
    }
    for (std::size_t f = 0; f < L; ++f) {
      const double* filter = w.data.data() + f * span;
      double best = -std::numeric_limits<double>::infinity();
      std::size_t best_at = 0;
      for (std::size_t p = 0; p < windows; ++p) {
        // Rows p..p+n-1 are contiguous in the row-major input.
        const double z = params.bias[n - 1][f] + dot(filter, input.data.data() + p * input.cols, span);
        if (z > best) {
          best = z;
          best_at = p;
        }
      }
      out[(n - 1) * L + f] = best > 0.0 ? best : 0.0;
      if (trace != nullptr) {
        trace->argmax[n - 1][f] = best_at;
        trace->peak[n - 1][f] = best;
      }
    }
  }
  return out;
}

void cnn_backward(const CnnParams& params, const Matrix& input, const CnnTrace& trace,
                  std::span<const double> grad_out, CnnParams& grads, std::size_t column,
                  std::span<double> column_grad) {
  const std::size_t L = params.filters;
  for (std::size_t n = 1; n <= 3; ++n) {
    const std::size_t span = n * params.width;
    for (std::size_t f = 0; f < L; ++f) {
      const double g = grad_out[(n - 1) * L + f];
      if (g == 0.0 || trace.peak[n - 1][f] <= 0.0) continue;
      const std::size_t p = trace.argmax[n - 1][f];
      axpy(g, input.data.data() + p * input.cols, grads.weights[n - 1].data.data() + f * span, span);
      grads.bias[n - 1][f] += g;
      if (!column_grad.empty()) {
        const double* filter = params.weights[n - 1].data.data() + f * span;
        for (std::size_t j = 0; j < n; ++j) {
          column_grad[p + j] += g * filter[j * params.width + column];
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// MLP

MlpParams make_mlp(std::size_t in, std::size_t out, HeadKind kind) {
  MlpParams p;
  p.in = in;
  p.out = out;
  p.kind = kind;
  p.hidden_w = Matrix(in, in);
  p.hidden_b.assign(in, 0.0);
  p.out_w = Matrix(out, in);
  p.out_b.assign(out, 0.0);
  return p;
}

void init_mlp(MlpParams& params, Rng& rng) {
  glorot(params.hidden_w.data, params.in, params.in, rng);
  glorot(params.out_w.data, params.in, params.out, rng);
  std::fill(params.hidden_b.begin(), params.hidden_b.end(), 0.0);
  std::fill(params.out_b.begin(), params.out_b.end(), 0.0);
}

std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> x,
                                std::span<const ColumnRange> active, double dropout_rate,
                                Rng* dropout_rng, MlpTrace& trace) {
  if (x.size() != params.in) {
    throw ShapeError("mlp input has " + std::to_string(x.size()) + " entries, expected " +
                     std::to_string(params.in));
  }
  const std::size_t in = params.in;
  trace.hidden.assign(in, 0.0);
  for (std::size_t j = 0; j < in; ++j) {
    const double* row = params.hidden_w.data.data() + j * in;
    double z = params.hidden_b[j];
    for (const auto& r : active) z += dot(row + r.begin, x.data() + r.begin, r.end - r.begin);
    trace.hidden[j] = sigmoid(z);
  }
  trace.kept = trace.hidden;
  trace.scale.clear();
  if (dropout_rng != nullptr && dropout_rate > 0.0) {
    trace.scale.assign(in, 0.0);
    const double keep = 1.0 / (1.0 - dropout_rate);
    for (std::size_t j = 0; j < in; ++j) {
      trace.scale[j] = uniform01(*dropout_rng) < dropout_rate ? 0.0 : keep;
      trace.kept[j] *= trace.scale[j];
    }
  }
  trace.output.assign(params.out, 0.0);
  for (std::size_t o = 0; o < params.out; ++o) {
    trace.output[o] = params.out_b[o] + dot(params.out_w.data.data() + o * in, trace.kept.data(), in);
  }
  if (params.kind == HeadKind::kSoftmax) {
    softmax_inplace(trace.output);
  } else {
    for (double& z : trace.output) z = sigmoid(z);
  }
  return trace.output;
}

std::vector<double> mlp_apply(const MlpParams& params, std::span<const double> x) {
  const ColumnRange all{0, params.in};
  MlpTrace trace;
  return mlp_forward(params, x, std::span<const ColumnRange>(&all, 1), 0.0, nullptr, trace);
}

void mlp_backward(const MlpParams& params, std::span<const double> x,
                  std::span<const ColumnRange> active, const MlpTrace& trace,
                  std::span<const double> grad_logits, MlpParams& grads, std::span<double> grad_x) {
  const std::size_t in = params.in;
  std::vector<double> grad_hidden(in, 0.0);
  for (std::size_t o = 0; o < params.out; ++o) {
    const double g = grad_logits[o];
    if (g == 0.0) continue;
    axpy(g, trace.kept.data(), grads.out_w.data.data() + o * in, in);
    grads.out_b[o] += g;
    axpy(g, params.out_w.data.data() + o * in, grad_hidden.data(), in);
  }
  if (!grad_x.empty()) {
    for (const auto& r : active) std::fill(grad_x.begin() + r.begin, grad_x.begin() + r.end, 0.0);
  }
  for (std::size_t j = 0; j < in; ++j) {
    double g = grad_hidden[j];
    if (!trace.scale.empty()) g *= trace.scale[j];
    const double h = trace.hidden[j];
    g *= h * (1.0 - h);
    if (g == 0.0) continue;
    grads.hidden_b[j] += g;
    double* grad_row = grads.hidden_w.data.data() + j * in;
    const double* row = params.hidden_w.data.data() + j * in;
    for (const auto& r : active) {
      axpy(g, x.data() + r.begin, grad_row + r.begin, r.end - r.begin);
      if (!grad_x.empty()) axpy(g, row + r.begin, grad_x.data() + r.begin, r.end - r.begin);
    }
  }
}

std::vector<double> assemble_vst_input(std::span<const double> f1, const std::array<double, 6>& f2,
                                       std::span<const double> c, const MlpParams& gate) {
  std::vector<double> out;
  out.reserve(f1.size() + 6 * c.size());
  if (!f1.empty()) {
    const auto g = mlp_apply(gate, c);
    if (g.size() != f1.size()) {
      throw ShapeError("gate produces " + std::to_string(g.size()) + " values for a " +
                       std::to_string(f1.size()) + "-dim belief vector");
    }
    for (std::size_t i = 0; i < f1.size(); ++i) out.push_back(f1[i] * g[i]);
  }
  for (std::size_t i = 0; i < 6; ++i) {
    for (double x : c) out.push_back(f2[i] * x);
  }
  return out;
}

double cross_entropy(std::span<const double> pred, std::size_t gold) {
  return -std::log(std::max(pred[gold], 1e-12));
}

std::vector<double> dropout(std::span<const double> x, double rate, Rng& rng, bool training) {
  if (rate < 0.0 || rate >= 1.0) throw ArgumentError("dropout rate must lie in [0, 1)");
  std::vector<double> out(x.begin(), x.end());
  if (!training || rate == 0.0) return out;
  const double keep = 1.0 / (1.0 - rate);
  for (double& v : out) v = uniform01(rng) < rate ? 0.0 : v * keep;
  return out;
}

// ---------------------------------------------------------------------------
// Optimisation

double global_norm(std::span<const ParamRef> grads) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double x : g.data) sq += x * x;
  }
  return std::sqrt(sq);
}

double clip_global_norm(std::span<const ParamRef> grads, double max_norm) {
  const double norm = global_norm(grads);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (const auto& g : grads) {
      for (double& x : g.data) x *= scale;
    }
  }
  return norm;
}

void AdamState::step(std::span<const ParamRef> params, std::span<const ParamRef> grads) {
  if (params.size() != grads.size()) throw ShapeError("adam: parameter/gradient group mismatch");
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.data.size(), 0.0);
      v_.emplace_back(p.data.size(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw ShapeError("adam: parameter groups changed between steps");
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k].data;
    auto g = grads[k].data;
    if (p.size() != g.size() || p.size() != m_[k].size()) {
      throw ShapeError("adam: shape mismatch in group " + params[k].name);
    }
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      p[i] -= config_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.epsilon);
    }
  }
}

// ---------------------------------------------------------------------------
// Gradient checking

double GradCheckReport::max_rel_error() const {
  double worst = 0.0;
  for (const auto& g : groups) worst = std::max(worst, g.max_rel_error);
  return worst;
}

GradCheckReport check_gradients(std::span<const ParamRef> params,
                                std::span<const ParamRef> analytic,
                                const std::function<double()>& loss, double h, double floor) {
  if (params.size() != analytic.size()) throw ShapeError("gradcheck: group count mismatch");
  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    GradCheckReport::Group group{params[k].name, params[k].data.size(), 0.0};
    for (std::size_t i = 0; i < params[k].data.size(); ++i) {
      double& x = params[k].data[i];
      const double saved = x;
      x = saved + h;
      const double up = loss();
      x = saved - h;
      const double down = loss();
      x = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[k].data[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      group.max_rel_error = std::max(group.max_rel_error, std::abs(a - numeric) / denom);
    }
    report.groups.push_back(group);
  }
  return report;
}

}  // namespace edst
