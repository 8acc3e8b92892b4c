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

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "edst/error.hpp"
#include "edst/head.hpp"
#include "edst/neural.hpp"

using namespace edst;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& x : m.data) x = standard_normal(rng);
  return m;
}

// Direct windowed convolution, ReLU and max-pool.
std::vector<double> oracle_cnn(const CnnParams& p, const Matrix& m) {
  std::vector<double> out;
  for (std::size_t n = 1; n <= 3; ++n) {
    for (std::size_t f = 0; f < p.filters; ++f) {
      double best = -1e300;
      for (std::size_t i = 0; i + n <= m.rows; ++i) {
        double s = p.bias[n - 1][f];
        for (std::size_t k = 0; k < n; ++k) {
          for (std::size_t j = 0; j < m.cols; ++j) {
            s += p.weights[n - 1](f, k * m.cols + j) * m(i + k, j);
          }
        }
        best = std::max(best, s);
      }
      out.push_back(std::max(0.0, best));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("random helpers stay in range") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform01(rng);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(uniform_index(rng, 7) < 7);
  }
  Rng a(4), b(4);
  CHECK(standard_normal(a) == standard_normal(b));
}

TEST_CASE("softmax and sigmoid") {
  std::vector<double> logits{1000.0, 1000.0, 1000.0};
  softmax_inplace(logits);
  for (double p : logits) CHECK(p == doctest::Approx(1.0 / 3.0));
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(-800.0) >= 0.0);
  CHECK(sigmoid(800.0) <= 1.0);
}

TEST_CASE("CNN output shape and zero input") {
  CnnParams p = make_cnn(302, 50);
  CHECK(cnn_extract(p, Matrix(3, 302)).size() == 150);
  for (double x : cnn_extract(p, Matrix(7, 302))) CHECK(x == 0.0);
  CHECK_THROWS_AS(cnn_extract(p, Matrix(2, 302)), ShapeError);
  CHECK_THROWS_AS(cnn_extract(p, Matrix(3, 301)), ShapeError);
}

TEST_CASE("CNN matches a brute-force convolution") {
  Rng rng(17);
  for (std::size_t rows : {3u, 4u, 9u}) {
    CnnParams p = make_cnn(5, 3);
    init_cnn(p, rng);
    for (auto& b : p.bias) {
      for (double& x : b) x = 0.3 * standard_normal(rng);
    }
    const Matrix m = random_matrix(rows, 5, rng);
    const auto got = cnn_extract(p, m);
    const auto want = oracle_cnn(p, m);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("max pooling ignores extra rows that score lower") {
  Rng rng(2);
  CnnParams p = make_cnn(4, 2);
  init_cnn(p, rng);
  Matrix small = random_matrix(3, 4, rng);
  for (double& x : small.data) x = std::abs(x);
  for (auto& w : p.weights) {
    for (double& x : w.data) x = std::abs(x);
  }
  Matrix big(10, 4);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) big(i, j) = small(i, j);
  }
  const auto a = cnn_extract(p, small);
  const auto b = cnn_extract(p, big);
  CHECK(a == b);
  CHECK(a == oracle_cnn(p, small));
}

TEST_CASE("MLP outputs") {
  MlpParams soft = make_mlp(4, 3, HeadKind::kSoftmax);
  const std::vector<double> x{0.5, -1.0, 2.0, 0.0};
  for (double p : mlp_apply(soft, x)) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  Rng rng(8);
  init_mlp(soft, rng);
  const auto p = mlp_apply(soft, x);
  double total = 0.0;
  for (double v : p) {
    CHECK(v > 0.0);
    total += v;
  }
  CHECK(std::abs(total - 1.0) < 1e-12);

  MlpParams sig = make_mlp(4, 5, HeadKind::kSigmoid);
  init_mlp(sig, rng);
  for (double v : mlp_apply(sig, x)) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }

  const std::vector<ColumnRange> all{{0, 4}};
  MlpTrace trace;
  CHECK(mlp_forward(soft, x, all, 0.0, nullptr, trace) == mlp_apply(soft, x));
  const std::vector<double> sparse{0.0, 0.0, 2.0, 1.0};
  const std::vector<ColumnRange> tail{{2, 4}};
  const auto a = mlp_forward(soft, sparse, tail, 0.0, nullptr, trace);
  const auto b = mlp_apply(soft, sparse);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-14));
}

TEST_CASE("input assembly") {
  const std::size_t filters = 50;
  const std::size_t summary = 3 * filters;
  std::vector<double> c(summary);
  for (std::size_t i = 0; i < summary; ++i) c[i] = 0.01 * double(i + 1);
  MlpParams gate = make_mlp(summary, 3, HeadKind::kSigmoid);
  for (double& b : gate.out_b) b = 1000.0;
  const std::vector<double> f1{0.2, 0.3, 0.5};
  const auto x = assemble_vst_input(f1, {0, 0, 0, 0, 0, 1}, c, gate);
  REQUIRE(x.size() == 903);
  for (std::size_t i = 0; i < 3; ++i) CHECK(x[i] == f1[i]);
  for (std::size_t i = 3; i < 3 + 5 * summary; ++i) CHECK(x[i] == 0.0);
  for (std::size_t i = 0; i < summary; ++i) CHECK(x[3 + 5 * summary + i] == c[i]);

  const auto y = assemble_vst_input({}, {1, 0, 1, 0, 0, 0}, c, gate);
  REQUIRE(y.size() == 900);
  CHECK(y[0] == c[0]);
  CHECK(y[summary] == 0.0);
  CHECK(y[2 * summary] == c[0]);

  MlpParams half = make_mlp(summary, 2, HeadKind::kSigmoid);
  const auto z = assemble_vst_input(std::vector<double>{0.4, 0.6}, {0, 0, 0, 0, 0, 1}, c, half);
  CHECK(z.size() == 902);
  CHECK(z[0] == doctest::Approx(0.2));
}

TEST_CASE("cross entropy") {
  CHECK(cross_entropy(std::vector<double>{1, 0, 0}, 0) == 0.0);
  CHECK(cross_entropy(std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}, 2) ==
        doctest::Approx(1.0986122886681098));
  const double clamped = cross_entropy(std::vector<double>{1, 0, 0}, 1);
  CHECK(std::isfinite(clamped));
  CHECK(clamped <= -std::log(1e-12) + 1e-9);
}

TEST_CASE("dropout") {
  Rng rng(3);
  const std::vector<double> x{1.0, -2.0, 0.5, 4.0};
  CHECK(dropout(x, 0.5, rng, false) == x);
  CHECK(dropout(x, 0.0, rng, true) == x);
  std::vector<double> mean(x.size(), 0.0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto y = dropout(x, 0.5, rng, true);
    for (std::size_t j = 0; j < x.size(); ++j) {
      CHECK((y[j] == 0.0 || y[j] == 2.0 * x[j]));
      mean[j] += y[j] / draws;
    }
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    CHECK(std::abs(mean[j] - x[j]) <= 0.05 * std::abs(x[j]));
  }
}

TEST_CASE("global norm clipping") {
  std::vector<double> a{6.0, 0.0}, b{8.0};
  std::vector<ParamRef> g{{"a", a}, {"b", b}};
  CHECK(clip_global_norm(g, 5.0) == doctest::Approx(10.0));
  CHECK(a[0] == doctest::Approx(3.0));
  CHECK(b[0] == doctest::Approx(4.0));
  CHECK(global_norm(g) <= 5.0 + 1e-9);

  std::vector<double> c{4.9};
  std::vector<ParamRef> small{{"c", c}};
  clip_global_norm(small, 5.0);
  CHECK(c[0] == 4.9);

  Rng rng(6);
  std::vector<double> big(100);
  for (double& x : big) x = 10.0 * standard_normal(rng);
  std::vector<ParamRef> r{{"big", big}};
  clip_global_norm(r, 5.0);
  CHECK(global_norm(r) <= 5.0 + 1e-9);
}

TEST_CASE("Adam") {
  std::vector<double> w{1.0, -2.0, 3.0};
  std::vector<double> g{0.0, 0.0, 0.0};
  std::vector<ParamRef> ps{{"w", w}}, gs{{"w", g}};
  AdamState zero;
  zero.step(ps, gs);
  CHECK(w == std::vector<double>{1.0, -2.0, 3.0});

  g = {0.5, -3.0, 100.0};
  AdamState adam(AdamConfig{});
  adam.step(ps, gs);
  CHECK(w[0] == doctest::Approx(1.0 - 1e-3).epsilon(1e-6));
  CHECK(w[1] == doctest::Approx(-2.0 + 1e-3).epsilon(1e-6));
  CHECK(w[2] == doctest::Approx(3.0 - 1e-3).epsilon(1e-6));
  CHECK(adam.steps() == 1);

  std::vector<double> w1{1.0, 2.0}, w2{1.0, 2.0}, gg{0.3, -0.7};
  AdamState s1, s2;
  for (int i = 0; i < 5; ++i) {
    std::vector<ParamRef> p1{{"w", w1}}, p2{{"w", w2}}, gr{{"w", gg}};
    s1.step(p1, gr);
    s2.step(p2, gr);
  }
  CHECK(w1 == w2);
}

TEST_CASE("finite-difference checker catches a wrong gradient") {
  std::vector<double> x{0.7, -1.3};
  std::vector<double> good{2 * 0.7, 3 * -1.3 * -1.3};
  std::vector<double> bad{2 * 0.7, 1.0};
  auto loss = [&] { return x[0] * x[0] + x[1] * x[1] * x[1]; };
  std::vector<ParamRef> p{{"x", x}};
  std::vector<ParamRef> ga{{"x", good}}, gb{{"x", bad}};
  CHECK(check_gradients(p, ga, loss).max_rel_error() < 1e-6);
  CHECK(check_gradients(p, gb, loss).max_rel_error() > 0.1);
  CHECK(x == std::vector<double>{0.7, -1.3});
}

TEST_CASE("head gradients match finite differences") {
  HeadConfig value{10, 4, 3, true, 3, true, 0.5};
  HeadConfig slot{10, 4, 3, true, 2, true, 0.5};
  HeadConfig request{10, 4, 0, false, 2, true, 0.5};
  HeadConfig two_label{10, 4, 2, true, 2, true, 0.5};
  HeadConfig turn_level{10, 4, 0, true, 3, true, 0.5};
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (const auto& cfg : {value, slot, request, two_label, turn_level}) {
      const auto report = head_gradient_check(cfg, seed);
      for (const auto& g : report.groups) {
        INFO("group " << g.name << " seed " << seed);
        CHECK(g.max_rel_error < 1e-4);
      }
    }
  }
  const auto report = head_gradient_check(value, 4, 2);
  CHECK(report.max_rel_error() < 1e-4);
}

TEST_CASE("gated-off blocks receive no gradient") {
  const HeadConfig cfg{6, 3, 3, true, 3, true, 0.0};
  Rng rng(12);
  HeadParams p = make_head(cfg);
  init_head(p, cfg, rng);
  FeatureInput in;
  in.tokens = 4;
  auto words = std::make_shared<Matrix>(4, 6);
  for (double& x : words->data) x = standard_normal(rng);
  in.words = words;
  in.dots = {0.3, -0.2, 1.1, 0.4};
  in.string_match = {0, 0, 1, 0};
  in.belief = {0.2, 0.3, 0.5};
  in.acts = {0, 1, 0, 0, 0, 0};
  HeadParams g = make_head(cfg);
  zero_head(g);
  head_loss_gradient(cfg, p, in, 0, g, nullptr);
  const std::size_t s = cfg.summary_dim();
  for (std::size_t block = 0; block < 6; ++block) {
    double mass = 0.0;
    for (std::size_t r = 0; r < g.out.hidden_w.rows; ++r) {
      for (std::size_t c = 3 + block * s; c < 3 + (block + 1) * s; ++c) {
        mass += std::abs(g.out.hidden_w(r, c));
      }
    }
    if (block == 1) {
      CHECK(mass > 0.0);
    } else {
      CHECK(mass == 0.0);
    }
  }
}

TEST_CASE("head shapes") {
  const HeadConfig cfg{300, 50, 3, true, 3, true, 0.5};
  CHECK(cfg.feature_width() == 302);
  CHECK(cfg.summary_dim() == 150);
  CHECK(cfg.input_dim() == 903);
  HeadConfig req = cfg;
  req.belief_dim = 0;
  req.act_gates = false;
  CHECK(req.input_dim() == 150);
  HeadParams p = make_head(cfg);
  CHECK(p.dot.w1 == 1.0);
  CHECK(p.dot.b1 == 0.0);
  CHECK(p.out.hidden_w.rows == 903);
  CHECK(p.out.hidden_w.cols == 903);
  CHECK(p.gate.out == 3);
}
