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

#include "kgad/scoring.hpp"

#include <algorithm>

#include "kgad/error.hpp"
#include "kgad/forward.hpp"

namespace kgad {

namespace {

constexpr std::size_t kChunk = 4096;

}  // namespace

std::vector<double> score_triples(const ModelParams& model, const KnowledgeGraph& graph,
                                  std::size_t m, const TrainConfig& config) {
  if (model.dims.entities != static_cast<Index>(graph.entity_count()) ||
      model.dims.relations != static_cast<Index>(graph.relation_count())) {
    throw Error("model vocabulary (" + std::to_string(model.dims.entities) + " entities, " +
                std::to_string(model.dims.relations) + " relations) does not match the corpus (" +
                std::to_string(graph.entity_count()) + ", " + std::to_string(graph.relation_count()) + ")");
  }
  if (m < 1) throw UsageError("neighbor count must be >= 1");
  const std::size_t n = graph.size();
  if (n == 0) return {};

  // Encodings are row-independent, so the table is built chunk by chunk.
  const Index dim = model.dims.dim;
  Tensor q(static_cast<Index>(n), 3 * dim), qp(static_cast<Index>(n), dim), f(static_cast<Index>(n), 1);
  for (std::size_t start = 0; start < n; start += kChunk) {
    const std::size_t len = std::min(kChunk, n - start);
    const std::span<const Triple> part(graph.triples().data() + start, len);
    Tape tape;
    const EncodedTable t = encode_table(bind_frozen(tape, model), part);
    const auto s = static_cast<Index>(start), l = static_cast<Index>(len);
    q.middleRows(s, l) = t.q.value();
    qp.middleRows(s, l) = t.q_prime.value();
    f.middleRows(s, l) = t.f_entity.value();
  }

  std::vector<double> scores(n);
  for (std::size_t start = 0; start < n; start += kChunk) {
    const std::size_t len = std::min(kChunk, n - start);
    std::vector<Index> rows(len), head, tail;
    head.reserve(len * m);
    tail.reserve(len * m);
    for (std::size_t i = 0; i < len; ++i) {
      const TripleId id{static_cast<std::uint32_t>(start + i)};
      rows[i] = static_cast<Index>(start + i);
      Rng rng = seeded_rng({kScoringSeed, id.value});
      for (TripleId nb : head_neighbors(graph, id, m, rng)) head.push_back(nb.value);
      for (TripleId nb : tail_neighbors(graph, id, m, rng)) tail.push_back(nb.value);
    }
    Tape tape;
    const BoundModel bound = bind_frozen(tape, model);
    const EncodedTable table{tape.constant(q), tape.constant(qp), tape.constant(f)};
    const ScoreComponents c = score_rows(bound, table, rows, head, tail, static_cast<Index>(m), config);
    const Tensor& s = c.score.value();
    for (std::size_t i = 0; i < len; ++i) scores[start + i] = s(static_cast<Index>(i), 0);
  }
  return scores;
}

RankedScores score_all(const ModelParams& model, const LabeledCorpus& corpus, std::size_t m,
                       double alpha, bool aggregation_sigmoid) {
  TrainConfig config;
  config.alpha = alpha;
  config.aggregation_sigmoid = aggregation_sigmoid;
  const std::vector<double> scores = score_triples(model, corpus.graph, m, config);
  return rank_scores(scores);
}

}  // namespace kgad
