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
#include <numeric>

#include "edst/corpus.hpp"
#include "edst/error.hpp"

namespace edst {

std::vector<std::size_t> apportion(std::size_t total, std::span<const double> ratios) {
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw ArgumentError("ratios must be finite and >= 0");
    sum += r;
  }
  if (!(sum > 0.0)) throw ArgumentError("ratios must not all be zero");

  std::vector<std::size_t> counts(ratios.size(), 0);
  // Remainders are quantized so that quotas equal in exact arithmetic tie
  // despite rounding, and fall through to the ratio tie-break.
  std::vector<long long> remainder(ratios.size(), 0);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const double quota = double(total) * ratios[i] / sum;
    counts[i] = static_cast<std::size_t>(std::floor(quota + 1e-9));
    remainder[i] = std::llround(std::max(0.0, quota - double(counts[i])) * 1e9);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(ratios.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
    return ratios[a] > ratios[b];
  });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % order.size()) {
    if (ratios[order[k]] == 0.0) continue;
    ++counts[order[k]];
    ++assigned;
  }
  return counts;
}

MinibatchSampler::MinibatchSampler(std::vector<std::size_t> labels, SamplerConfig config,
                                   bool drop_empty) {
  if (config.batch_size == 0) throw ArgumentError("batch size must be positive");
  if (config.ratios.empty()) throw ArgumentError("sampler needs class ratios");
  by_class_.resize(config.ratios.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= by_class_.size()) throw ArgumentError("example label outside the ratios");
    by_class_[labels[i]].push_back(i);
  }
  total_ = labels.size();
  std::vector<double> ratios = config.ratios;
  for (std::size_t c = 0; c < ratios.size(); ++c) {
    if (ratios[c] > 0.0 && by_class_[c].empty()) {
      if (!drop_empty) {
        throw SamplingError("class " + std::to_string(c) + " has a positive ratio but no examples");
      }
      ratios[c] = 0.0;
    }
  }
  if (std::all_of(ratios.begin(), ratios.end(), [](double r) { return r == 0.0; })) {
    throw SamplingError("no class has both examples and a positive ratio");
  }
  counts_ = apportion(config.batch_size, ratios);
}

std::vector<std::size_t> MinibatchSampler::sample(Rng& rng) const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < by_class_.size(); ++c) {
    const auto& pool = by_class_[c];
    const std::size_t want = counts_[c];
    if (want == 0) continue;
    if (pool.size() < want) {
      for (std::size_t k = 0; k < want; ++k) out.push_back(pool[uniform_index(rng, pool.size())]);
      continue;
    }
    // Partial Fisher-Yates over a copy.
    std::vector<std::size_t> items = pool;
    for (std::size_t k = 0; k < want; ++k) {
      const std::size_t j = k + uniform_index(rng, items.size() - k);
      std::swap(items[k], items[j]);
      out.push_back(items[k]);
    }
  }
  return out;
}

CorpusSplit split_corpus(const std::vector<Dialog>& dialogs, std::array<double, 3> ratio,
                         std::uint64_t seed) {
  if (dialogs.size() < 5) throw ArgumentError("splitting needs at least 5 dialogs");
  std::vector<std::size_t> order(dialogs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle(order, rng);
  const auto sizes = apportion(dialogs.size(), ratio);
  CorpusSplit split;
  std::size_t k = 0;
  for (std::size_t i = 0; i < sizes[0]; ++i) split.train.push_back(dialogs[order[k++]]);
  for (std::size_t i = 0; i < sizes[1]; ++i) split.valid.push_back(dialogs[order[k++]]);
  for (std::size_t i = 0; i < sizes[2]; ++i) split.test.push_back(dialogs[order[k++]]);
  return split;
}

}  // namespace edst
