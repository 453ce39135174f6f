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

#include <algorithm>
#include <cmath>

#include "kgad/error.hpp"
#include "kgad/tensor.hpp"

namespace kgad {

/// Added inside every logarithm of the consistency terms.
inline constexpr double kKlEpsilon = 1e-12;

// ---------------------------------------------------------------------------
// Plain evaluation on dense vectors. Higher scores mean "more anomalous".
// ---------------------------------------------------------------------------

template <typename Scalar>
struct TripleScoreParts {
  Scalar f_bilstm{};    // ||ẽ_h + ẽ_r - ẽ_t||_2 from the entity view
  Scalar f_bilstm_d{};  // MLP1(q') from the triplet view
  Scalar sim_entity{};  // z1 . z2
  Scalar sim_triplet{}; // z3 . z4
};

/// alpha * (f_bilstm + f_bilstm_d) + (1 - alpha) * (sim_entity + sim_triplet) / 2.
template <typename Scalar>
Scalar triple_score(const TripleScoreParts<Scalar>& p, Scalar alpha) {
  return alpha * (p.f_bilstm + p.f_bilstm_d) +
         (Scalar(1) - alpha) * Scalar(0.5) * (p.sim_entity + p.sim_triplet);
}

/// Batch-mean hinge. Default orientation asks positives to score at least
/// gamma below negatives; `literal` uses max(0, mean(neg) - mean(pos) + gamma).
template <typename DerivedP, typename DerivedN>
typename DerivedP::Scalar margin_loss(const Eigen::MatrixBase<DerivedP>& pos,
                                      const Eigen::MatrixBase<DerivedN>& neg,
                                      typename DerivedP::Scalar gamma, bool literal = false) {
  using Scalar = typename DerivedP::Scalar;
  if (pos.size() != neg.size()) throw ShapeError("margin_loss: length mismatch");
  if (pos.size() == 0) throw ShapeError("margin_loss: empty batch");
  const Scalar gap = literal ? neg.mean() - pos.mean() : pos.mean() - neg.mean();
  return std::max(Scalar(0), gap + gamma);
}

/// Softmax of a vector of logits.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> softmax_vector(
    const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> e = logits.reshaped().array() - logits.maxCoeff();
  e = e.exp();
  return (e / e.sum()).matrix();
}

/// KL(softmax(p_logits) || softmax(q_logits)) = sum_i P_i ln(P_i / Q_i).
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar kl_divergence(const Eigen::MatrixBase<DerivedP>& p_logits,
                                        const Eigen::MatrixBase<DerivedQ>& q_logits) {
  using Scalar = typename DerivedP::Scalar;
  if (p_logits.size() != q_logits.size()) throw ShapeError("kl_divergence: length mismatch");
  if (p_logits.size() == 0) throw ShapeError("kl_divergence: empty input");
  const Eigen::Array<Scalar, Eigen::Dynamic, 1> p = softmax_vector(p_logits).array();
  const Eigen::Array<Scalar, Eigen::Dynamic, 1> q = softmax_vector(q_logits).array();
  return (p * ((p + Scalar(kKlEpsilon)).log() - (q + Scalar(kKlEpsilon)).log())).sum();
}

/// (1 - beta) * margin + beta * consistency.
template <typename Scalar>
Scalar total_loss(Scalar margin, Scalar consistency, Scalar beta) {
  return (Scalar(1) - beta) * margin + beta * consistency;
}

// ---------------------------------------------------------------------------
// The same quantities as differentiable tape nodes (columns are batches).
// ---------------------------------------------------------------------------

/// Per-triple score column from four B x 1 component columns.
Var triple_score(Var f_bilstm, Var f_bilstm_d, Var sim_entity, Var sim_triplet, double alpha);

Var margin_loss(Var pos_scores, Var neg_scores, double gamma, bool literal = false);

/// Softmax over the batch axis of each B x 1 input, then KL.
Var kl_divergence(Var p_logits, Var q_logits);

/// The six per-triple score columns the consistency terms compare.
struct ViewScores {
  Var entity_scores;   // f_entity
  Var triplet_scores;  // f_triplet
  Var head_entity;     // MLP2(z1)
  Var head_triplet;    // MLP3(z3)
  Var tail_entity;     // MLP2(z2)
  Var tail_triplet;    // MLP3(z4)
};

struct ConsistencyTerms {
  Var score, head, tail;
  Var total;
};

ConsistencyTerms consistency_loss(const ViewScores& vs);

Var total_loss(Var margin, Var consistency, double beta);

}  // namespace kgad
