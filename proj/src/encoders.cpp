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

#include "kgad/encoders.hpp"

#include <optional>
#include <unordered_map>

#include "kgad/error.hpp"

namespace kgad {

namespace {

struct ParamSpec {
  std::string name;
  Index rows, cols;
  bool bias;
};

std::vector<ParamSpec> param_specs(const ModelDims& d) {
  const Index n = d.dim;
  const Index h = d.hidden();
  std::vector<ParamSpec> specs = {
      {"entity_embeddings", d.entities, n, false},
      {"relation_embeddings", d.relations, n, false},
  };
  for (const char* lstm : {"entity_lstm", "triplet_lstm"}) {
    for (const char* dir : {"fwd", "bwd"}) {
      const std::string prefix = std::string(lstm) + "." + dir + ".";
      specs.push_back({prefix + "w_x", n, 4 * h, false});
      specs.push_back({prefix + "w_h", h, 4 * h, false});
      specs.push_back({prefix + "b", 1, 4 * h, true});
    }
  }
  const std::pair<const char*, Index> mlps[] = {{"mlp1", n}, {"mlp2", 3 * n}, {"mlp3", n}};
  for (const auto& [name, in] : mlps) {
    const std::string prefix = std::string(name) + ".";
    specs.push_back({prefix + "w1", in, n, false});
    specs.push_back({prefix + "b1", 1, n, true});
    specs.push_back({prefix + "w2", n, 1, false});
    specs.push_back({prefix + "b2", 1, 1, true});
  }
  return specs;
}

void check_dims(const ModelDims& d) {
  if (d.dim < 2 || d.dim % 2 != 0) throw UsageError("embedding dim must be even and >= 2");
  if (d.entities < 1 || d.relations < 1) throw UsageError("model needs at least one entity and relation");
}

template <typename Leaf>
BoundModel bind_with(const ModelDims& dims, Leaf leaf) {
  auto direction = [&](const std::string& prefix) {
    return LstmDirectionVars{leaf(prefix + "w_x"), leaf(prefix + "w_h"), leaf(prefix + "b")};
  };
  auto bilstm = [&](const std::string& name) {
    return BiLstmVars{direction(name + ".fwd."), direction(name + ".bwd.")};
  };
  auto mlp_vars = [&](const std::string& name) {
    return MlpVars{leaf(name + ".w1"), leaf(name + ".b1"), leaf(name + ".w2"), leaf(name + ".b2")};
  };
  BoundModel m;
  m.dims = dims;
  m.entities = leaf("entity_embeddings");
  m.relations = leaf("relation_embeddings");
  m.entity_lstm = bilstm("entity_lstm");
  m.triplet_lstm = bilstm("triplet_lstm");
  m.mlp1 = mlp_vars("mlp1");
  m.mlp2 = mlp_vars("mlp2");
  m.mlp3 = mlp_vars("mlp3");
  return m;
}

struct CellOut {
  Var h, c;
};

CellOut lstm_cell(Var pre, std::optional<Var> c_prev) {
  Var c = lstm_cell_state(pre, c_prev);
  return {lstm_hidden(pre, c), c};
}

// Unique table ids in first-seen order, with each input's slot.
struct Dedup {
  std::vector<Index> ids;
  std::unordered_map<std::uint64_t, Index> slot;

  Index add(std::uint64_t key, Index id) {
    auto [it, fresh] = slot.try_emplace(key, static_cast<Index>(ids.size()));
    if (fresh) ids.push_back(id);
    return it->second;
  }
};

// States of one LSTM direction after each of the three tokens. Prefixes
// shared between triples are computed once, so s1 and s2 are held as a
// table plus per-triple rows; s3 has one row per triple.
struct DirectionStates {
  Var s1;
  std::vector<Index> rows1;
  Var s2;
  std::vector<Index> rows2;
  Var s3;
};

DirectionStates run_direction(const BoundModel& model, const LstmDirectionVars& p,
                              std::span<const Triple> triples, bool reverse) {
  const std::size_t rows = triples.size();
  auto first = [&](const Triple& t) { return reverse ? t.tail : t.head; };
  auto last = [&](const Triple& t) { return reverse ? t.head : t.tail; };

  // Every entity is projected once; `firsts` and `pairs` index unique prefixes.
  Dedup entities, relations, firsts, pairs;
  std::vector<Index> pair_first, pair_rel;
  std::vector<Index> row_first(rows), row_pair(rows), row_last(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const Triple& t = triples[i];
    const std::uint32_t e = first(t).value;
    const Index e_slot = entities.add(e, e);
    row_first[i] = firsts.add(e, e_slot);
    const std::uint64_t key = (std::uint64_t{e} << 32) | t.relation.value;
    const std::size_t pairs_before = pairs.ids.size();
    row_pair[i] = pairs.add(key, 0);
    if (pairs.ids.size() != pairs_before) {
      pair_first.push_back(row_first[i]);
      pair_rel.push_back(relations.add(t.relation.value, t.relation.value));
    }
    const std::uint32_t l = last(t).value;
    row_last[i] = entities.add(l, l);
  }

  Var ent_proj = matmul(gather_rows(model.entities, entities.ids), p.w_x);
  Var rel_proj = matmul(gather_rows(model.relations, relations.ids), p.w_x);

  CellOut c1 = lstm_cell(gather_rows(ent_proj, firsts.ids) + p.b, std::nullopt);

  Var h1p = gather_rows(c1.h, pair_first);
  Var c1p = gather_rows(c1.c, pair_first);
  CellOut c2 = lstm_cell(gather_rows(rel_proj, pair_rel) + matmul(h1p, p.w_h) + p.b, c1p);

  // The recurrent term of step 3 depends only on the (first, relation) prefix.
  Var recurrent = matmul(c2.h, p.w_h) + p.b;
  Var h3 = lstm_gathered_step(ent_proj, row_last, recurrent, c2.c, row_pair);

  return {c1.h, std::move(row_first), c2.h, std::move(row_pair), h3};
}

void check_triples(const BoundModel& model, std::span<const Triple> triples) {
  if (triples.empty()) throw ShapeError("encode: no triples");
  for (const Triple& t : triples) {
    if (static_cast<Index>(t.head.index()) >= model.dims.entities ||
        static_cast<Index>(t.tail.index()) >= model.dims.entities ||
        static_cast<Index>(t.relation.index()) >= model.dims.relations) {
      throw Error("encode: triple id outside the model vocabulary");
    }
  }
}

}  // namespace

ModelParams ModelParams::init(const ModelDims& dims, Rng& rng) {
  check_dims(dims);
  ModelParams m;
  m.dims = dims;
  for (const ParamSpec& s : param_specs(dims)) {
    m.store.add(s.name, s.bias ? Tensor::Zero(s.rows, s.cols) : xavier_init(s.rows, s.cols, rng));
  }
  return m;
}

ModelParams ModelParams::from_store(ParamStore store) {
  if (!store.contains("entity_embeddings") || !store.contains("relation_embeddings")) {
    throw Error("parameter set lacks embedding tables");
  }
  ModelDims dims;
  dims.entities = store.at("entity_embeddings").value.rows();
  dims.relations = store.at("relation_embeddings").value.rows();
  dims.dim = store.at("entity_embeddings").value.cols();
  check_dims(dims);
  const auto specs = param_specs(dims);
  if (store.size() != specs.size()) throw Error("parameter set has unexpected tensors");
  for (const ParamSpec& s : specs) {
    if (!store.contains(s.name)) throw Error("parameter set lacks '" + s.name + "'");
    const Tensor& v = store.at(s.name).value;
    if (v.rows() != s.rows || v.cols() != s.cols) {
      throw ShapeError("parameter '" + s.name + "' has shape " + shape_string(v));
    }
  }
  return ModelParams{dims, std::move(store)};
}

std::string param_group(std::string_view name) {
  return std::string(name.substr(0, name.find('.')));
}

std::vector<std::string> param_groups() {
  return {"entity_embeddings", "relation_embeddings", "entity_lstm", "triplet_lstm",
          "mlp1", "mlp2", "mlp3"};
}

BoundModel bind(Tape& tape, ModelParams& model) {
  return bind_with(model.dims, [&](const std::string& name) { return tape.param(model.store, name); });
}

BoundModel bind_frozen(Tape& tape, const ModelParams& model) {
  return bind_with(model.dims,
                   [&](const std::string& name) { return tape.constant(model.store.at(name).value); });
}

EntityView encode_entity_view(const BoundModel& model, std::span<const Triple> triples) {
  check_triples(model, triples);
  const DirectionStates f = run_direction(model, model.entity_lstm.fwd, triples, false);
  const DirectionStates b = run_direction(model, model.entity_lstm.bwd, triples, true);
  // Backward direction visits t, r, h: its state after step k belongs to token 4-k.
  const GatherPart head[] = {{f.s1, f.rows1}, {b.s3, {}}};
  const GatherPart rel[] = {{f.s2, f.rows2}, {b.s2, b.rows2}};
  const GatherPart tail[] = {{f.s3, {}}, {b.s1, b.rows1}};
  const GatherPart q[] = {head[0], head[1], rel[0], rel[1], tail[0], tail[1]};
  EntityView out;
  out.head = gather_concat_cols(head);
  out.relation = gather_concat_cols(rel);
  out.tail = gather_concat_cols(tail);
  out.q = gather_concat_cols(q);
  return out;
}

Var encode_triplet_view(const BoundModel& model, std::span<const Triple> triples) {
  check_triples(model, triples);
  const DirectionStates f = run_direction(model, model.triplet_lstm.fwd, triples, false);
  const DirectionStates b = run_direction(model, model.triplet_lstm.bwd, triples, true);
  const Var parts[] = {f.s3, b.s3};
  return concat_cols(parts);
}

Var mlp(const MlpVars& p, Var x) { return matmul(relu(matmul(x, p.w1) + p.b1), p.w2) + p.b2; }

Var aggregate_neighbors(Var anchors, Var table, std::span<const Index> neighbor_rows, Index m,
                        bool output_sigmoid) {
  Var z = attend(anchors, table, neighbor_rows, m);
  return output_sigmoid ? sigmoid(z) : z;
}

Aggregation aggregate_neighbors(const Eigen::RowVectorXd& anchor, const Tensor& neighbors,
                                bool output_sigmoid) {
  if (neighbors.rows() < 1) throw ShapeError("aggregate_neighbors: no neighbors");
  if (neighbors.cols() != anchor.size()) {
    throw ShapeError("aggregate_neighbors: anchor width " + std::to_string(anchor.size()) +
                     " vs neighbor shape " + shape_string(neighbors));
  }
  Tape tape;
  Var a = tape.constant(anchor);
  Var t = tape.constant(neighbors);
  std::vector<Index> rows(static_cast<std::size_t>(neighbors.rows()));
  for (std::size_t j = 0; j < rows.size(); ++j) rows[j] = static_cast<Index>(j);
  Tensor weights;
  Var z = attend(a, t, rows, neighbors.rows(), &weights);
  if (output_sigmoid) z = sigmoid(z);
  return {z.value().row(0), weights.row(0)};
}

TripleEncoding encode_triple(const ModelParams& model, const Triple& triple) {
  Tape tape;
  const BoundModel bound = bind_frozen(tape, model);
  const Triple one[] = {triple};
  const EntityView ev = encode_entity_view(bound, one);
  const Var qp = encode_triplet_view(bound, one);
  return {ev.head.value().row(0), ev.relation.value().row(0), ev.tail.value().row(0),
          ev.q.value().row(0), qp.value().row(0)};
}

}  // namespace kgad
