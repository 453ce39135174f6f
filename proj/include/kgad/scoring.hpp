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

#include "kgad/config.hpp"
#include "kgad/corruption.hpp"
#include "kgad/encoders.hpp"
#include "kgad/metrics.hpp"

namespace kgad {

/// Anomaly score of every triple in `graph`, indexed by TripleId. Neighbors
/// of triple i come from an rng seeded by (kScoringSeed, i); no negatives or
/// consistency terms are involved. Uses config.alpha and
/// config.aggregation_sigmoid; `m` must be >= 1.
std::vector<double> score_triples(const ModelParams& model, const KnowledgeGraph& graph,
                                  std::size_t m, const TrainConfig& config);

/// score_triples followed by rank_scores.
RankedScores score_all(const ModelParams& model, const LabeledCorpus& corpus, std::size_t m,
                       double alpha, bool aggregation_sigmoid = false);

}  // namespace kgad
