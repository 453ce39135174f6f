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

#include "kgad/baselines.hpp"

#include "kgad/error.hpp"
#include "kgad/log.hpp"

namespace kgad {

namespace {

std::vector<std::string> table_names(BaselineMethod method) {
  if (method == BaselineMethod::kComplEx) return {"entity_re", "entity_im", "relation_re", "relation_im"};
  return {"entity_embeddings", "relation_embeddings"};
}

struct Lookup {
  std::vector<Index> heads, relations, tails;
};

Lookup lookup(std::span<const Triple> triples) {
  Lookup l;
  for (const Triple& t : triples) {
    l.heads.push_back(t.head.value);
    l.relations.push_back(t.relation.value);
    l.tails.push_back(t.tail.value);
  }
  return l;
}

// Column of anomaly scores for `triples` on a tape.
Var score_column(BaselineMethod method, Tape& tape, ParamStore& store, std::span<const Triple> triples) {
  const Lookup l = lookup(triples);
  switch (method) {
    case BaselineMethod::kTransE: {
      Var e = tape.param(store, "entity_embeddings");
      Var r = tape.param(store, "relation_embeddings");
      return l2_norm(gather_rows(e, l.heads) + gather_rows(r, l.relations) - gather_rows(e, l.tails));
    }
    case BaselineMethod::kDistMult: {
      Var e = tape.param(store, "entity_embeddings");
      Var r = tape.param(store, "relation_embeddings");
      return -1.0 * dot(gather_rows(e, l.heads) * gather_rows(r, l.relations), gather_rows(e, l.tails));
    }
    case BaselineMethod::kComplEx: {
      Var er = tape.param(store, "entity_re"), ei = tape.param(store, "entity_im");
      Var rr = tape.param(store, "relation_re"), ri = tape.param(store, "relation_im");
      Var hr = gather_rows(er, l.heads), hi = gather_rows(ei, l.heads);
      Var tr = gather_rows(er, l.tails), ti = gather_rows(ei, l.tails);
      Var wr = gather_rows(rr, l.relations), wi = gather_rows(ri, l.relations);
      Var re = dot(hr * wr, tr) + dot(hi * wr, ti) + dot(hr * wi, ti) - dot(hi * wi, tr);
      return -1.0 * re;
    }
  }
  throw Error("unknown baseline method");
}

}  // namespace

BaselineMethod parse_baseline_method(std::string_view name) {
  if (name == "transe") return BaselineMethod::kTransE;
  if (name == "distmult") return BaselineMethod::kDistMult;
  if (name == "complex") return BaselineMethod::kComplEx;
  throw UsageError("unknown baseline method '" + std::string(name) + "' (expected transe, distmult or complex)");
}

std::string to_string(BaselineMethod method) {
  switch (method) {
    case BaselineMethod::kTransE: return "transe";
    case BaselineMethod::kDistMult: return "distmult";
    case BaselineMethod::kComplEx: return "complex";
  }
  return "unknown";
}

BaselineModel train_baseline(BaselineMethod method, const LabeledCorpus& corpus,
                             const TrainConfig& config, int run) {
  config.validate();
  const KnowledgeGraph& graph = corpus.graph;
  const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(run);
  BaselineModel model;
  model.method = method;
  Rng rng = seeded_rng({seed, 0xba5eULL});
  for (const std::string& name : table_names(method)) {
    const bool entity = name.rfind("entity", 0) == 0;
    const auto rows = static_cast<Index>(entity ? graph.entity_count() : graph.relation_count());
    model.store.add(name, xavier_init(rows, config.dim, rng));
  }

  const StepFn step = [&](Tape& tape, ParamStore& store, const Batch& batch) {
    std::vector<Triple> pos, neg;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      pos.push_back(graph.triple(batch.anchors[i]));
      neg.push_back(batch.negatives[i].triple);
    }
    Var sp = score_column(method, tape, store, pos);
    Var sn = score_column(method, tape, store, neg);
    Var loss = mean(relu(sp - sn + config.baseline_margin));
    return StepLoss{loss, loss.scalar(), 0.0};
  };
  model.history = fit(model.store, graph, config, 1, seed, step);
  model.history.run = run;
  log_info(to_string(method) + " run " + std::to_string(run) + ": " +
           std::to_string(model.history.epochs.size()) + " epochs");
  return model;
}

std::vector<double> baseline_scores(const BaselineModel& model, const KnowledgeGraph& graph) {
  for (const std::string& name : table_names(model.method)) {
    if (!model.store.contains(name)) throw Error("baseline model lacks '" + name + "'");
  }
  std::vector<double> scores;
  scores.reserve(graph.size());
  if (model.method == BaselineMethod::kComplEx) {
    const Tensor& er = model.store.at("entity_re").value;
    const Tensor& ei = model.store.at("entity_im").value;
    const Tensor& rr = model.store.at("relation_re").value;
    const Tensor& ri = model.store.at("relation_im").value;
    for (const Triple& t : graph.triples()) {
      const auto h = t.head.index(), r = t.relation.index(), v = t.tail.index();
      scores.push_back(complex_score(er.row(h), ei.row(h), rr.row(r), ri.row(r), er.row(v), ei.row(v)));
    }
    return scores;
  }
  const Tensor& e = model.store.at("entity_embeddings").value;
  const Tensor& r = model.store.at("relation_embeddings").value;
  for (const Triple& t : graph.triples()) {
    const auto h = e.row(t.head.index()), rel = r.row(t.relation.index()), v = e.row(t.tail.index());
    scores.push_back(model.method == BaselineMethod::kTransE ? transe_score(h, rel, v)
                                                             : distmult_score(h, rel, v));
  }
  return scores;
}

}  // namespace kgad
