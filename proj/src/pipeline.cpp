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

#include "kgad/pipeline.hpp"

#include <sstream>

#include "kgad/error.hpp"
#include "kgad/scoring.hpp"

namespace kgad {

RunMetrics evaluate_model(const ModelParams& model, const TrainConfig& config, const LabeledCorpus& corpus) {
  const std::size_t m = resolve_neighbor_count(corpus.graph, config);
  const RankedScores ranked = rank_scores(score_triples(model, corpus.graph, m, config));
  return evaluate(ranked, corpus.labels.read());
}

MetricsReport evaluate_runs(const std::vector<TrainedModel>& runs, const LabeledCorpus& corpus) {
  MetricsReport report = make_report(corpus, "adkgd");
  for (const TrainedModel& t : runs) {
    report.runs.push_back(evaluate_model(t.params, t.config, corpus));
    report.seeds.push_back(t.config.seed);
  }
  return report;
}

MetricsReport run_baseline(BaselineMethod method, const LabeledCorpus& corpus, const TrainConfig& config) {
  config.validate();
  MetricsReport report = make_report(corpus, to_string(method));
  for (int r = 0; r < config.runs; ++r) {
    const BaselineModel model = train_baseline(method, corpus, config, r);
    const RankedScores ranked = rank_scores(baseline_scores(model, corpus.graph));
    report.runs.push_back(evaluate(ranked, corpus.labels.read()));
    report.seeds.push_back(config.seed + static_cast<std::uint64_t>(r));
  }
  return report;
}

Checkpoint make_checkpoint(const TrainedModel& trained, const KnowledgeGraph& graph) {
  Checkpoint ckpt;
  ckpt.config = trained.config.to_text();
  ckpt.entity_fingerprint = fingerprint(graph.entities());
  ckpt.relation_fingerprint = fingerprint(graph.relations());
  for (const auto& [name, entry] : trained.params.store) ckpt.params.add(name, entry.value);
  return ckpt;
}

TrainedModel restore_checkpoint(const Checkpoint& ckpt, const KnowledgeGraph& graph) {
  if (ckpt.entity_fingerprint != fingerprint(graph.entities()) ||
      ckpt.relation_fingerprint != fingerprint(graph.relations())) {
    throw Error("checkpoint vocabulary does not match the corpus");
  }
  std::istringstream text(ckpt.config);
  TrainedModel t;
  t.config = parse_config(text);
  ParamStore store;
  for (const auto& [name, entry] : ckpt.params) store.add(name, entry.value);
  t.params = ModelParams::from_store(std::move(store));
  return t;
}

}  // namespace kgad
