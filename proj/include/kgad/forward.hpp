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

#include <span>
#include <vector>

#include "kgad/config.hpp"
#include "kgad/corruption.hpp"
#include "kgad/encoders.hpp"
#include "kgad/objective.hpp"

namespace kgad {

/// Both channels' encodings of a list of triples.
struct EncodedTable {
  Var q;         // rows x 3n, entity view
  Var q_prime;   // rows x n, triplet view
  Var f_entity;  // rows x 1, ||ẽ_h + ẽ_r - ẽ_t||_2
};

EncodedTable encode_table(const BoundModel& model, std::span<const Triple> triples);

/// Per-row score components; z1..z4 are the four neighbor aggregations.
struct ScoreComponents {
  Var f_bilstm, f_bilstm_d, sim_entity, sim_triplet;
  Var z1, z2, z3, z4;
  Var score;
};

/// Scores table rows `rows`; row i aggregates the table rows
/// head_nbrs[i*m, (i+1)*m) and tail_nbrs[i*m, (i+1)*m).
ScoreComponents score_rows(const BoundModel& model, const EncodedTable& table,
                           std::span<const Index> rows, std::span<const Index> head_nbrs,
                           std::span<const Index> tail_nbrs, Index m, const TrainConfig& config);

struct BatchLoss {
  Var pos_scores, neg_scores;  // B x 1
  ViewScores views;
  ConsistencyTerms consistency;
  Var margin;
  Var total;
};

/// Full objective on one batch: every triple involved (anchors, negatives and
/// all neighbors) is encoded once, then anchors and negatives are scored.
/// The consistency terms are taken over the anchors.
BatchLoss forward_batch(const BoundModel& model, const KnowledgeGraph& graph, const Batch& batch,
                        const TrainConfig& config);

}  // namespace kgad
