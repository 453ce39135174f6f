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
#include <string>
#include <vector>

#include "kgad/graph.hpp"
#include "kgad/params.hpp"
#include "kgad/tensor.hpp"

namespace kgad {

struct ModelDims {
  Index entities = 0;
  Index relations = 0;
  Index dim = 0;  // n; even, each LSTM direction has n/2 hidden units

  Index hidden() const { return dim / 2; }
  bool operator==(const ModelDims&) const = default;
};

/// Every trainable tensor of the dual-channel model, held in one ParamStore.
///
/// Layout (n = dim, h = n/2):
///   entity_embeddings            |E| x n
///   relation_embeddings          |R| x n
///   {entity,triplet}_lstm.{fwd,bwd}.w_x   n x 4h   gate order i, f, g, o
///   {entity,triplet}_lstm.{fwd,bwd}.w_h   h x 4h
///   {entity,triplet}_lstm.{fwd,bwd}.b     1 x 4h
///   mlp1.{w1,b1,w2,b2}   n -> n -> 1   (triplet-view score)
///   mlp2.{w1,b1,w2,b2}  3n -> n -> 1   (entity-view neighbor context)
///   mlp3.{w1,b1,w2,b2}   n -> n -> 1   (triplet-view neighbor context)
struct ModelParams {
  ModelDims dims;
  ParamStore store;

  /// Xavier-initialised weights, zero biases.
  static ModelParams init(const ModelDims& dims, Rng& rng);
  /// Adopts a store (e.g. from a checkpoint), validating every shape.
  static ModelParams from_store(ParamStore store);
};

/// Parameter group of a tensor name: the prefix before the first '.'.
std::string param_group(std::string_view name);
/// The seven groups in declaration order.
std::vector<std::string> param_groups();

struct LstmDirectionVars {
  Var w_x, w_h, b;
};

struct BiLstmVars {
  LstmDirectionVars fwd, bwd;
};

struct MlpVars {
  Var w1, b1, w2, b2;
};

/// Model parameters placed on a tape.
struct BoundModel {
  ModelDims dims;
  Var entities, relations;
  BiLstmVars entity_lstm, triplet_lstm;
  MlpVars mlp1, mlp2, mlp3;
};

/// Binds every parameter as a gradient-tracked leaf.
BoundModel bind(Tape& tape, ModelParams& model);
/// Binds every parameter as a constant (inference).
BoundModel bind_frozen(Tape& tape, const ModelParams& model);

/// Entity-view output for a list of triples (rows align with the input).
struct EntityView {
  Var head;      // ẽ_h, rows x n
  Var relation;  // ẽ_r
  Var tail;      // ẽ_t
  Var q;         // [ẽ_h; ẽ_r; ẽ_t], rows x 3n
};

/// Dimension-preserving BiLSTM over [e_h, e_r, e_t]; each token's output is
/// [forward state; backward state].
EntityView encode_entity_view(const BoundModel& model, std::span<const Triple> triples);

/// Dimension-reducing BiLSTM over [e_h, e_r, e_t]: forward state after the
/// tail concatenated with the backward state after the head, rows x n.
Var encode_triplet_view(const BoundModel& model, std::span<const Triple> triples);

/// relu(x w1 + b1) w2 + b2.
Var mlp(const MlpVars& p, Var x);

/// Attention aggregation of one anchor over m neighbor vectors.
struct Aggregation {
  Eigen::RowVectorXd z;
  Eigen::RowVectorXd weights;
};

/// z = sum_j softmax_j(anchor . v_j) v_j (optionally squashed by a sigmoid).
Aggregation aggregate_neighbors(const Eigen::RowVectorXd& anchor, const Tensor& neighbors,
                                bool output_sigmoid = false);

/// Batched form on a tape: anchors B x w, neighbors rows of `table`.
Var aggregate_neighbors(Var anchors, Var table, std::span<const Index> neighbor_rows, Index m,
                        bool output_sigmoid = false);

/// Single-triple conveniences evaluated without gradient tracking.
struct TripleEncoding {
  Eigen::RowVectorXd head, relation, tail;  // entity-view token outputs
  Eigen::RowVectorXd q;                     // 3n
  Eigen::RowVectorXd q_prime;               // n
};
TripleEncoding encode_triple(const ModelParams& model, const Triple& triple);

}  // namespace kgad
