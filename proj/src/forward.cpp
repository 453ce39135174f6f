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

#include "kgad/forward.hpp"

#include "kgad/error.hpp"

namespace kgad {

EncodedTable encode_table(const BoundModel& model, std::span<const Triple> triples) {
  const EntityView ev = encode_entity_view(model, triples);
  EncodedTable t;
  t.q = ev.q;
  t.q_prime = encode_triplet_view(model, triples);
  t.f_entity = l2_norm(ev.head + ev.relation - ev.tail);
  return t;
}

ScoreComponents score_rows(const BoundModel& model, const EncodedTable& table,
                           std::span<const Index> rows, std::span<const Index> head_nbrs,
                           std::span<const Index> tail_nbrs, Index m, const TrainConfig& config) {
  const bool squash = config.aggregation_sigmoid;
  ScoreComponents c;
  Var q = gather_rows(table.q, rows);
  Var qp = gather_rows(table.q_prime, rows);
  c.f_bilstm = gather_rows(table.f_entity, rows);
  c.f_bilstm_d = mlp(model.mlp1, qp);
  c.z1 = aggregate_neighbors(q, table.q, head_nbrs, m, squash);
  c.z2 = aggregate_neighbors(q, table.q, tail_nbrs, m, squash);
  c.z3 = aggregate_neighbors(qp, table.q_prime, head_nbrs, m, squash);
  c.z4 = aggregate_neighbors(qp, table.q_prime, tail_nbrs, m, squash);
  c.sim_entity = dot(c.z1, c.z2);
  c.sim_triplet = dot(c.z3, c.z4);
  c.score = triple_score(c.f_bilstm, c.f_bilstm_d, c.sim_entity, c.sim_triplet, config.alpha);
  return c;
}

BatchLoss forward_batch(const BoundModel& model, const KnowledgeGraph& graph, const Batch& batch,
                        const TrainConfig& config) {
  const std::size_t b = batch.size();
  const std::size_t m = batch.m;
  if (b == 0) throw ShapeError("forward_batch: empty batch");
  if (batch.negatives.size() != b || batch.anchor_head_nbrs.size() != b * m ||
      batch.anchor_tail_nbrs.size() != b * m || batch.negative_head_nbrs.size() != b * m ||
      batch.negative_tail_nbrs.size() != b * m) {
    throw ShapeError("forward_batch: inconsistent batch layout");
  }

  std::vector<Triple> triples;
  std::vector<Index> slot(graph.size(), -1);
  auto row_of = [&](TripleId id) {
    Index& s = slot[id.index()];
    if (s < 0) {
      s = static_cast<Index>(triples.size());
      triples.push_back(graph.triple(id));
    }
    return s;
  };

  std::vector<Index> rows(2 * b), head(2 * b * m), tail(2 * b * m);
  for (std::size_t i = 0; i < b; ++i) rows[i] = row_of(batch.anchors[i]);
  for (std::size_t k = 0; k < b * m; ++k) {
    head[k] = row_of(batch.anchor_head_nbrs[k]);
    tail[k] = row_of(batch.anchor_tail_nbrs[k]);
    head[b * m + k] = row_of(batch.negative_head_nbrs[k]);
    tail[b * m + k] = row_of(batch.negative_tail_nbrs[k]);
  }
  for (std::size_t i = 0; i < b; ++i) {
    rows[b + i] = static_cast<Index>(triples.size());
    triples.push_back(batch.negatives[i].triple);
  }

  const EncodedTable table = encode_table(model, triples);
  const ScoreComponents c =
      score_rows(model, table, rows, head, tail, static_cast<Index>(m), config);

  const Index B = static_cast<Index>(b);
  BatchLoss out;
  out.pos_scores = slice_rows(c.score, 0, B);
  out.neg_scores = slice_rows(c.score, B, B);
  out.views.entity_scores = slice_rows(c.f_bilstm, 0, B);
  out.views.triplet_scores = slice_rows(c.f_bilstm_d, 0, B);
  out.views.head_entity = mlp(model.mlp2, slice_rows(c.z1, 0, B));
  out.views.head_triplet = mlp(model.mlp3, slice_rows(c.z3, 0, B));
  out.views.tail_entity = mlp(model.mlp2, slice_rows(c.z2, 0, B));
  out.views.tail_triplet = mlp(model.mlp3, slice_rows(c.z4, 0, B));
  out.consistency = consistency_loss(out.views);
  out.margin = margin_loss(out.pos_scores, out.neg_scores, config.gamma, config.margin_literal);
  out.total = total_loss(out.margin, out.consistency.total, config.beta);
  return out;
}

}  // namespace kgad
