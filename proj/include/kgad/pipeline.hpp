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

#include <vector>

#include "kgad/baselines.hpp"
#include "kgad/checkpoint.hpp"
#include "kgad/report.hpp"
#include "kgad/trainer.hpp"

namespace kgad {

/// Metrics of one trained model; `config` supplies alpha, neighbor_count and
/// aggregation_sigmoid.
RunMetrics evaluate_model(const ModelParams& model, const TrainConfig& config, const LabeledCorpus& corpus);

/// One metrics block per trained run.
MetricsReport evaluate_runs(const std::vector<TrainedModel>& runs, const LabeledCorpus& corpus);

/// Trains and evaluates config.runs baseline runs.
MetricsReport run_baseline(BaselineMethod method, const LabeledCorpus& corpus, const TrainConfig& config);

Checkpoint make_checkpoint(const TrainedModel& trained, const KnowledgeGraph& graph);

/// Parameters and config from a checkpoint, verified against `graph`'s vocabularies.
TrainedModel restore_checkpoint(const Checkpoint& ckpt, const KnowledgeGraph& graph);

}  // namespace kgad
