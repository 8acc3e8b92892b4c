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

#include "edst/train.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "edst/error.hpp"

namespace edst {

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
  if (patience_ == 0) throw ArgumentError("patience must be at least 1");
}

bool EarlyStopping::update(double loss) {
  ++epochs_;
  if (loss < best_) {
    best_ = loss;
    best_epoch_ = epochs_;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

double mean_loss(const HeadConfig& config, const HeadParams& params, const HeadStream& stream) {
  if (stream.size() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    total += head_loss(config, params, stream.inputs[i], stream.gold[i]);
  }
  return total / double(stream.size());
}

HeadTrainResult train_head(const std::string& name, const HeadConfig& config, HeadParams& params,
                           const HeadStream& train, const HeadStream& valid,
                           const SamplerConfig& sampler_config, const TrainConfig& cfg, Rng& rng,
                           const EpochCallback& on_epoch) {
  if (train.size() == 0) throw ArgumentError("head '" + name + "' has no training examples");
  if (cfg.max_epochs == 0) throw ArgumentError("max_epochs must be positive");
  HeadConfig run_config = config;
  run_config.dropout = cfg.dropout;

  const MinibatchSampler sampler(train.gold, sampler_config, /*drop_empty=*/true);
  const std::size_t batch = sampler_config.batch_size;
  const std::size_t batches = (train.size() + batch - 1) / batch;
  const HeadStream& monitor = valid.size() > 0 ? valid : train;

  HeadParams grads = make_head(config);
  const auto param_refs = head_groups(params);
  const auto grad_refs = head_groups(grads);
  AdamState adam(cfg.adam);
  EarlyStopping stopping(cfg.patience);
  HeadParams best = params;
  HeadTrainResult result;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t b = 0; b < batches; ++b) {
      const auto indices = sampler.sample(rng);
      zero_head(grads);
      double batch_loss = 0.0;
      for (std::size_t i : indices) {
        batch_loss += head_loss_gradient(run_config, params, train.inputs[i], train.gold[i], grads,
                                         &rng);
      }
      const double inv = 1.0 / double(indices.size());
      for (const auto& g : grad_refs) {
        for (double& x : g.data) x *= inv;
      }
      clip_global_norm(grad_refs, cfg.clip_norm);
      adam.step(param_refs, grad_refs);
      epoch_loss += batch_loss;
      seen += indices.size();
    }
    const double train_loss = epoch_loss / double(seen);
    const double valid_loss = mean_loss(config, params, monitor);
    const bool improved = stopping.update(valid_loss);
    if (improved) best = params;
    result.train_loss.push_back(train_loss);
    result.valid_loss.push_back(valid_loss);
    result.epochs_run = epoch;
    if (on_epoch) on_epoch(EpochLog{name, epoch, train_loss, valid_loss, improved});
    if (stopping.should_stop()) break;
  }
  params = std::move(best);
  result.best_epoch = stopping.best_epoch();
  return result;
}

ModelStreams build_streams(const TrackerModel& model, const std::vector<Dialog>& dialogs) {
  ModelStreams streams;
  for (const auto& s : model.ontology().informable()) {
    streams.value[s.name];
    streams.slot[s.name];
  }
  for (const auto& r : model.ontology().requestable()) streams.request[r];

  for (const auto& dialog : dialogs) {
    const auto examples = decompose(dialog, model.ontology(), model.mode());
    std::map<const Turn*, UtteranceFeatures> features;
    for (const auto& ex : examples) {
      auto it = features.find(ex.turn);
      if (it == features.end()) {
        it = features.emplace(ex.turn, UtteranceFeatures(ex.turn->user, model.embeddings())).first;
      }
      const UtteranceFeatures& uf = it->second;
      switch (ex.kind) {
        case ExampleKind::kValue: {
          auto& st = streams.value.at(ex.slot);
          st.inputs.push_back(model.value_input(uf, ex.slot, ex.value, ex.turn->system_acts,
                                                ex.belief));
          st.gold.push_back(ex.gold);
          break;
        }
        case ExampleKind::kSlot: {
          auto& st = streams.slot.at(ex.slot);
          st.inputs.push_back(model.slot_input(uf, ex.slot, ex.turn->system_acts, ex.belief));
          st.gold.push_back(ex.gold);
          break;
        }
        case ExampleKind::kRequest: {
          auto& st = streams.request.at(ex.slot);
          st.inputs.push_back(model.request_input(uf, ex.slot));
          st.gold.push_back(ex.gold);
          break;
        }
      }
    }
  }
  return streams;
}

namespace {

std::uint64_t name_hash(const std::string& name) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Rng head_rng(std::uint64_t seed, const std::string& name) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(name_hash(name)),
                    static_cast<std::uint32_t>(name_hash(name) >> 32)};
  return Rng(seq);
}

}  // namespace

TrainLog train_model(TrackerModel& model, const std::vector<Dialog>& train,
                     const std::vector<Dialog>& valid, const TrainConfig& cfg,
                     const EpochCallback& on_epoch) {
  std::size_t turns = 0;
  for (const auto& d : train) turns += d.turns.size();
  if (turns == 0) throw ArgumentError("training corpus has no turns");

  const ModelStreams train_streams = build_streams(model, train);
  const ModelStreams valid_streams = build_streams(model, valid);
  TrainLog log;
  auto record = [&](const EpochLog& e) {
    log.epochs.push_back(e);
    if (on_epoch) on_epoch(e);
  };

  auto run = [&](const std::string& name, const HeadConfig& config, HeadParams& params,
                 const HeadStream& tr, const HeadStream& va, std::size_t batch,
                 const std::vector<double>& ratios) {
    Rng rng = head_rng(cfg.seed, name);
    init_head(params, config, rng);
    if (tr.size() == 0) return;
    SamplerConfig sc{batch, ratios};
    log.heads[name] = train_head(name, config, params, tr, va, sc, cfg, rng, record);
  };

  const auto& value_ratios =
      model.mode().labels == LabelScheme::kEnriched3 ? cfg.enriched_ratios : cfg.mention_ratios;
  for (const auto& s : model.ontology().informable()) {
    run("value/" + s.name, model.value_config(), model.value_head(s.name),
        train_streams.value.at(s.name), valid_streams.value.at(s.name), cfg.value_batch,
        value_ratios);
    run("slot/" + s.name, model.slot_config(), model.slot_head(s.name),
        train_streams.slot.at(s.name), valid_streams.slot.at(s.name), cfg.slot_batch,
        cfg.slot_ratios);
  }
  for (const auto& r : model.ontology().requestable()) {
    run("request/" + r, model.request_config(), model.request_head(r),
        train_streams.request.at(r), valid_streams.request.at(r), cfg.request_batch,
        cfg.request_ratios);
  }
  return log;
}

}  // namespace edst
