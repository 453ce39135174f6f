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

#include "kgad/objective.hpp"

namespace kgad {

namespace {

void check_column(std::string_view op, Var v) {
  if (v.cols() != 1 || v.rows() < 1) {
    throw ShapeError(std::string(op) + ": expected a non-empty column, got " + shape_string(v.value()));
  }
}

void check_unit_interval(std::string_view what, double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw UsageError(std::string(what) + " must lie in [0, 1]");
}

}  // namespace

Var triple_score(Var f_bilstm, Var f_bilstm_d, Var sim_entity, Var sim_triplet, double alpha) {
  check_unit_interval("alpha", alpha);
  return alpha * (f_bilstm + f_bilstm_d) + (0.5 * (1.0 - alpha)) * (sim_entity + sim_triplet);
}

Var margin_loss(Var pos_scores, Var neg_scores, double gamma, bool literal) {
  check_column("margin_loss", pos_scores);
  check_column("margin_loss", neg_scores);
  if (pos_scores.rows() != neg_scores.rows()) {
    throw ShapeError("margin_loss: length mismatch " + shape_string(pos_scores.value()) + " vs " +
                     shape_string(neg_scores.value()));
  }
  if (gamma < 0.0) throw UsageError("gamma must be non-negative");
  Var gap = literal ? mean(neg_scores) - mean(pos_scores) : mean(pos_scores) - mean(neg_scores);
  return relu(gap + gamma);
}

Var kl_divergence(Var p_logits, Var q_logits) {
  check_column("kl_divergence", p_logits);
  check_column("kl_divergence", q_logits);
  if (p_logits.rows() != q_logits.rows()) {
    throw ShapeError("kl_divergence: length mismatch " + shape_string(p_logits.value()) + " vs " +
                     shape_string(q_logits.value()));
  }
  Var p = softmax(p_logits, 0);
  Var q = softmax(q_logits, 0);
  return sum(p * (log(p + kKlEpsilon) - log(q + kKlEpsilon)));
}

ConsistencyTerms consistency_loss(const ViewScores& vs) {
  ConsistencyTerms t;
  t.score = kl_divergence(vs.entity_scores, vs.triplet_scores);
  t.head = kl_divergence(vs.head_entity, vs.head_triplet);
  t.tail = kl_divergence(vs.tail_entity, vs.tail_triplet);
  t.total = t.score + t.head + t.tail;
  return t;
}

Var total_loss(Var margin, Var consistency, double beta) {
  check_unit_interval("beta", beta);
  return (1.0 - beta) * margin + beta * consistency;
}

}  // namespace kgad
