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

#ifndef EDST_TRAIN_HPP_
#define EDST_TRAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "edst/corpus.hpp"
#include "edst/head.hpp"
#include "edst/neural.hpp"
#include "edst/tracker.hpp"

namespace edst {

struct TrainConfig {
  std::size_t value_batch = 256;
  std::size_t slot_batch = 64;
  std::size_t request_batch = 256;
  std::vector<double> enriched_ratios{0.7, 0.3, 7.0};  // LIKE : DISLIKE : NOT_MENTIONED
  std::vector<double> mention_ratios{1.0, 7.0};        // MENTIONED : NOT_MENTIONED
  std::vector<double> slot_ratios{1.0, 7.0};           // DONT_CARE : NOT_MENTIONED
  std::vector<double> request_ratios{1.0, 7.0};        // requested : not requested
  AdamConfig adam;
  double dropout = 0.5;
  double clip_norm = 5.0;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  std::uint64_t seed = 42;
};

// Stops once the monitored loss has not strictly improved for `patience`
// consecutive epochs.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience);

  // Records one epoch; returns true when it is a new best.
  bool update(double loss);
  bool should_stop() const { return stale_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }  // 1-based, 0 before any update
  double best_loss() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t epochs_ = 0;
  std::size_t stale_ = 0;
  std::size_t best_epoch_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

// Precomputed inputs and gold classes for one head.
struct HeadStream {
  std::vector<FeatureInput> inputs;
  std::vector<std::size_t> gold;

  std::size_t size() const { return gold.size(); }
};

struct EpochLog {
  std::string head;
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
  bool improved = false;
};

struct HeadTrainResult {
  std::vector<double> train_loss;  // mean minibatch loss per epoch
  std::vector<double> valid_loss;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Trains one head with ratio-sampled minibatches, Adam, dropout and global
// norm clipping; ceil(N / batch) batches per epoch. Early stopping watches
// the mean cross entropy on `valid` (on `train` when `valid` is empty) and the
// best parameters are restored at the end.
HeadTrainResult train_head(const std::string& name, const HeadConfig& config, HeadParams& params,
                           const HeadStream& train, const HeadStream& valid,
                           const SamplerConfig& sampler, const TrainConfig& cfg, Rng& rng,
                           const EpochCallback& on_epoch = {});

double mean_loss(const HeadConfig& config, const HeadParams& params, const HeadStream& stream);

struct TrainLog {
  std::vector<EpochLog> epochs;
  NameMap<HeadTrainResult> heads;
};

// Feature streams of every head of `model` over a corpus.
struct ModelStreams {
  NameMap<HeadStream> value, slot, request;
};
ModelStreams build_streams(const TrackerModel& model, const std::vector<Dialog>& dialogs);

// Initializes and trains every head of `model`. Each head draws from its own
// generator derived from cfg.seed, so results do not depend on head order.
// Throws ArgumentError when `train` holds no turns.
TrainLog train_model(TrackerModel& model, const std::vector<Dialog>& train,
                     const std::vector<Dialog>& valid, const TrainConfig& cfg,
                     const EpochCallback& on_epoch = {});

}  // namespace edst

#endif  // EDST_TRAIN_HPP_
