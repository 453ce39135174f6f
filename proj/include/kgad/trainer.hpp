/*
 * Copyright 2026 The kgad Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "kgad/config.hpp"
#include "kgad/corruption.hpp"
#include "kgad/encoders.hpp"

namespace kgad {

struct EpochRecord {
  int epoch = 0;  // 1-based
  double total = 0.0;
  double margin = 0.0;
  double consistency = 0.0;
  double seconds = 0.0;
};

struct TrainHistory {
  int run = 0;
  std::uint64_t seed = 0;
  std::vector<EpochRecord> epochs;
  int selected_epoch = 0;  // 0: the initialization was kept
  bool stopped_early = false;
};

struct TrainedModel {
  ModelParams params;
  TrainHistory history;
  TrainConfig config;  // neighbor_count resolved, seed of this run
};

/// neighbor_count, or mean_neighbor_count of the graph when it is 0.
std::size_t resolve_neighbor_count(const KnowledgeGraph& graph, const TrainConfig& config);

/// Loss terms of one optimisation step. `margin` and `consistency` are
/// reported only; `total` is differentiated.
struct StepLoss {
  Var total;
  double margin = 0.0;
  double consistency = 0.0;
};

using StepFn = std::function<StepLoss(Tape&, ParamStore&, const Batch&)>;

/// Shared epoch loop: batches, backward, Adam, early stopping. On return
/// `store` holds the values from the epoch with the lowest mean loss.
/// Non-finite values abort with the epoch and batch in the message.
TrainHistory fit(ParamStore& store, const KnowledgeGraph& graph, const TrainConfig& config,
                 std::size_t m, std::uint64_t seed, const StepFn& step);

/// One training run with seed config.seed + run.
TrainedModel train(const LabeledCorpus& corpus, const TrainConfig& config, int run = 0);

/// config.runs independent runs, up to config.threads at a time, ordered by run.
std::vector<TrainedModel> train_multi(const LabeledCorpus& corpus, const TrainConfig& config);

}  // namespace kgad
