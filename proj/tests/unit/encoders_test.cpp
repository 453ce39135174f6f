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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "kgad/encoders.hpp"
#include "kgad/error.hpp"

namespace kgad {
namespace {

using Row = Eigen::RowVectorXd;

ModelDims dims(Index n, Index e = 5, Index r = 3) { return {e, r, n}; }

Triple triple(std::uint32_t h, std::uint32_t r, std::uint32_t t) {
  return {EntityId{h}, RelationId{r}, EntityId{t}};
}

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Element-by-element LSTM direction, written without Eigen expressions.
std::vector<Row> naive_direction(const ParamStore& s, const std::string& prefix,
                                 const std::vector<Row>& tokens) {
  const Tensor& wx = s.at(prefix + "w_x").value;
  const Tensor& wh = s.at(prefix + "w_h").value;
  const Tensor& b = s.at(prefix + "b").value;
  const Index h = wh.rows();
  std::vector<double> hs(h, 0.0), cs(h, 0.0);
  std::vector<Row> out;
  for (const Row& x : tokens) {
    std::vector<double> pre(4 * h);
    for (Index k = 0; k < 4 * h; ++k) {
      double acc = b(0, k);
      for (Index j = 0; j < x.size(); ++j) acc += x(j) * wx(j, k);
      for (Index j = 0; j < h; ++j) acc += hs[j] * wh(j, k);
      pre[k] = acc;
    }
    Row state(h);
    for (Index u = 0; u < h; ++u) {
      const double i = sig(pre[u]);
      const double f = sig(pre[h + u]);
      const double g = std::tanh(pre[2 * h + u]);
      const double o = sig(pre[3 * h + u]);
      cs[u] = f * cs[u] + i * g;
      hs[u] = o * std::tanh(cs[u]);
      state(u) = hs[u];
    }
    out.push_back(state);
  }
  return out;
}

Row join(const Row& a, const Row& b) {
  Row r(a.size() + b.size());
  r << a, b;
  return r;
}

TripleEncoding naive_encode(const ModelParams& m, const Triple& t) {
  const Tensor& E = m.store.at("entity_embeddings").value;
  const Tensor& R = m.store.at("relation_embeddings").value;
  const Row eh = E.row(t.head.value), er = R.row(t.relation.value), et = E.row(t.tail.value);
  const auto F = naive_direction(m.store, "entity_lstm.fwd.", {eh, er, et});
  const auto B = naive_direction(m.store, "entity_lstm.bwd.", {et, er, eh});
  const auto G = naive_direction(m.store, "triplet_lstm.fwd.", {eh, er, et});
  const auto H = naive_direction(m.store, "triplet_lstm.bwd.", {et, er, eh});
  TripleEncoding out;
  out.head = join(F[0], B[2]);
  out.relation = join(F[1], B[1]);
  out.tail = join(F[2], B[0]);
  out.q = join(join(out.head, out.relation), out.tail);
  out.q_prime = join(G[2], H[2]);
  return out;
}

void randomise_biases(ModelParams& m, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 0.5);
  for (auto& [name, e] : m.store) {
    if (name.ends_with(".b") || name.ends_with(".b1") || name.ends_with(".b2")) {
      for (Index i = 0; i < e.value.size(); ++i) e.value.data()[i] = nd(rng);
    }
  }
}

TEST(Encoders, OutputWidths) {
  Rng rng(1);
  const ModelParams m = ModelParams::init(dims(100), rng);
  const TripleEncoding enc = encode_triple(m, triple(0, 1, 2));
  EXPECT_EQ(enc.head.size(), 100);
  EXPECT_EQ(enc.q.size(), 300);
  EXPECT_EQ(enc.q_prime.size(), 100);
}

TEST(Encoders, ZeroParametersGiveZeroOutputs) {
  Rng rng(1);
  ModelParams m = ModelParams::init(dims(8), rng);
  for (auto& [name, e] : m.store) e.value.setZero();
  const TripleEncoding enc = encode_triple(m, triple(1, 0, 3));
  EXPECT_EQ(enc.q.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(enc.q_prime.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Encoders, MatchScalarOracle) {
  Rng rng(2);
  ModelParams m = ModelParams::init(dims(4), rng);
  randomise_biases(m, rng);
  for (const Triple& t : {triple(0, 0, 1), triple(4, 2, 4), triple(3, 1, 0)}) {
    const TripleEncoding got = encode_triple(m, t);
    const TripleEncoding want = naive_encode(m, t);
    EXPECT_LT((got.q - want.q).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((got.q_prime - want.q_prime).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((got.tail - want.tail).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Encoders, BiasOnlyModelMatchesOracle) {
  Rng rng(3);
  ModelParams m = ModelParams::init(dims(4), rng);
  for (auto& [name, e] : m.store) e.value.setZero();
  randomise_biases(m, rng);
  const TripleEncoding got = encode_triple(m, triple(2, 1, 0));
  const TripleEncoding want = naive_encode(m, triple(2, 1, 0));
  EXPECT_LT((got.q - want.q).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_GT(got.q.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Encoders, BatchRowsMatchSingleTriples) {
  Rng rng(4);
  ModelParams m = ModelParams::init(dims(6, 7, 3), rng);
  randomise_biases(m, rng);
  // Shared prefixes and repeated triples exercise the deduplicated paths.
  const std::vector<Triple> batch = {triple(0, 1, 2), triple(0, 1, 3), triple(0, 2, 2),
                                     triple(5, 1, 2), triple(0, 1, 2), triple(6, 0, 6)};
  Tape tape;
  const BoundModel bound = bind_frozen(tape, m);
  const EntityView ev = encode_entity_view(bound, batch);
  const Var qp = encode_triplet_view(bound, batch);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const TripleEncoding want = naive_encode(m, batch[i]);
    const Index r = static_cast<Index>(i);
    EXPECT_LT((ev.q.value().row(r) - want.q).cwiseAbs().maxCoeff(), 1e-14) << i;
    EXPECT_LT((ev.head.value().row(r) - want.head).cwiseAbs().maxCoeff(), 1e-14) << i;
    EXPECT_LT((qp.value().row(r) - want.q_prime).cwiseAbs().maxCoeff(), 1e-14) << i;
  }
  EXPECT_EQ(ev.q.value().row(0), ev.q.value().row(4));
}

TEST(Encoders, RejectsOutOfVocabularyAndEmpty) {
  Rng rng(1);
  const ModelParams m = ModelParams::init(dims(4), rng);
  EXPECT_THROW(encode_triple(m, triple(5, 0, 0)), Error);
  EXPECT_THROW(encode_triple(m, triple(0, 3, 0)), Error);
  Tape tape;
  const BoundModel bound = bind_frozen(tape, m);
  EXPECT_THROW(encode_entity_view(bound, std::span<const Triple>{}), ShapeError);
}

TEST(Params, OddOrTinyDimIsRejected) {
  Rng rng(1);
  EXPECT_THROW(ModelParams::init(dims(5), rng), UsageError);
  EXPECT_THROW(ModelParams::init(dims(0), rng), UsageError);
}

TEST(Params, LayoutAndZeroBiases) {
  Rng rng(1);
  const ModelParams m = ModelParams::init(dims(10, 6, 4), rng);
  EXPECT_EQ(m.store.size(), 26u);
  EXPECT_EQ(m.store.at("entity_embeddings").value.rows(), 6);
  EXPECT_EQ(m.store.at("entity_lstm.fwd.w_x").value.cols(), 20);
  EXPECT_EQ(m.store.at("entity_lstm.bwd.w_h").value.rows(), 5);
  EXPECT_EQ(m.store.at("mlp2.w1").value.rows(), 30);
  EXPECT_EQ(m.store.at("mlp3.w2").value.cols(), 1);
  for (const auto& [name, e] : m.store) {
    if (name.ends_with(".b") || name.ends_with(".b1") || name.ends_with(".b2")) {
      EXPECT_EQ(e.value.cwiseAbs().maxCoeff(), 0.0) << name;
    }
  }
}

TEST(Params, GroupsCoverEveryTensorOnce) {
  Rng rng(1);
  const ModelParams m = ModelParams::init(dims(4), rng);
  const auto groups = param_groups();
  ASSERT_EQ(groups.size(), 7u);
  for (const auto& [name, e] : m.store) {
    EXPECT_EQ(std::count(groups.begin(), groups.end(), param_group(name)), 1) << name;
  }
  EXPECT_EQ(param_group("mlp1.w1"), "mlp1");
  EXPECT_EQ(param_group("entity_embeddings"), "entity_embeddings");
}

TEST(Params, FromStoreValidates) {
  Rng rng(1);
  ModelParams m = ModelParams::init(dims(4, 3, 2), rng);
  const ModelParams back = ModelParams::from_store(m.store);
  EXPECT_EQ(back.dims, m.dims);
  EXPECT_TRUE(back.store.same_values(m.store));

  ParamStore extra = m.store;
  extra.add("stray", Tensor::Zero(1, 1));
  EXPECT_THROW(ModelParams::from_store(extra), Error);

  ParamStore bad = m.store;
  bad.at("mlp1.w1").value = Tensor::Zero(3, 4);
  EXPECT_THROW(ModelParams::from_store(bad), ShapeError);
}

TEST(Aggregate, TwoNeighborExample) {
  Row anchor(2);
  anchor << 1.0, 0.0;
  Tensor nb(2, 2);
  nb << 1.0, 0.0, 0.0, 1.0;
  const Aggregation a = aggregate_neighbors(anchor, nb);
  EXPECT_NEAR(a.weights(0), 0.7311, 1e-4);
  EXPECT_NEAR(a.weights(1), 0.2689, 1e-4);
  EXPECT_NEAR(a.z(0), 0.7311, 1e-4);
  EXPECT_NEAR(a.z(1), 0.2689, 1e-4);
  const Aggregation s = aggregate_neighbors(anchor, nb, true);
  EXPECT_NEAR(s.z(0), sig(a.z(0)), 1e-15);
}

TEST(Aggregate, EqualSimilaritiesGiveMean) {
  Row anchor = Row::Zero(3);
  Tensor nb(4, 3);
  nb.setRandom();
  const Aggregation a = aggregate_neighbors(anchor, nb);
  EXPECT_LT((a.z - nb.colwise().mean()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((a.weights.array() - 0.25).abs().maxCoeff(), 1e-15);
}

TEST(Aggregate, SingleNeighborIsReturned) {
  Row anchor(3);
  anchor << 5.0, -2.0, 1.0;
  Tensor nb(1, 3);
  nb << 0.3, 0.2, -0.9;
  const Aggregation a = aggregate_neighbors(anchor, nb);
  EXPECT_EQ(a.weights(0), 1.0);
  EXPECT_LT((a.z - nb.row(0)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Aggregate, ShapeErrors) {
  Row anchor = Row::Zero(3);
  EXPECT_THROW(aggregate_neighbors(anchor, Tensor::Zero(2, 4)), ShapeError);
  EXPECT_THROW(aggregate_neighbors(anchor, Tensor::Zero(0, 3)), ShapeError);
}

TEST(Aggregate, BruteForceProperties) {
  Rng rng(11);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_int_distribution<int> mdist(1, 12), wdist(1, 9);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = mdist(rng), w = wdist(rng);
    Row anchor(w);
    Tensor nb(m, w);
    for (Index i = 0; i < anchor.size(); ++i) anchor(i) = nd(rng);
    for (Index i = 0; i < nb.size(); ++i) nb.data()[i] = nd(rng);
    // Direct softmax with log-sum-exp.
    std::vector<double> s(m);
    double mx = -1e300;
    for (int j = 0; j < m; ++j) {
      s[j] = 0.0;
      for (int k = 0; k < w; ++k) s[j] += anchor(k) * nb(j, k);
      mx = std::max(mx, s[j]);
    }
    double denom = 0.0;
    for (int j = 0; j < m; ++j) denom += std::exp(s[j] - mx);
    Row z = Row::Zero(w);
    for (int j = 0; j < m; ++j) z += std::exp(s[j] - mx) / denom * nb.row(j);

    const Aggregation a = aggregate_neighbors(anchor, nb);
    EXPECT_LT((a.z - z).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(a.weights.sum(), 1.0, 1e-12);
    EXPECT_GE(a.weights.minCoeff(), 0.0);
    // Convex combination: each coordinate stays within the neighbors' range.
    for (int k = 0; k < w; ++k) {
      EXPECT_GE(a.z(k), nb.col(k).minCoeff() - 1e-12);
      EXPECT_LE(a.z(k), nb.col(k).maxCoeff() + 1e-12);
    }
  }
}

TEST(Aggregate, BatchedFormMatchesSingle) {
  Rng rng(12);
  Tensor table(6, 4);
  table.setRandom();
  Tensor anchors(2, 4);
  anchors.setRandom();
  const std::vector<Index> rows = {0, 3, 5, 1, 1, 2};
  Tape tape;
  const Var z = aggregate_neighbors(tape.constant(anchors), tape.constant(table), rows, 3);
  for (Index i = 0; i < 2; ++i) {
    Tensor nb(3, 4);
    for (Index j = 0; j < 3; ++j) nb.row(j) = table.row(rows[static_cast<std::size_t>(i * 3 + j)]);
    const Aggregation a = aggregate_neighbors(anchors.row(i), nb);
    EXPECT_LT((z.value().row(i) - a.z).cwiseAbs().maxCoeff(), 1e-14);
  }
}

}  // namespace
}  // namespace kgad
