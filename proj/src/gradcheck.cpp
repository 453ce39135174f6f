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

#include "kgad/gradcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "kgad/corruption.hpp"
#include "kgad/encoders.hpp"
#include "kgad/error.hpp"
#include "kgad/forward.hpp"

namespace kgad {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), kRelativeErrorFloor});
  return std::abs(analytic - numeric) / denom;
}

std::map<std::string, double> finite_difference_errors(ParamStore& store, const LossBuilder& loss,
                                                       double h) {
  store.zero_grad();
  {
    Tape tape;
    Var l = loss(tape, store);
    tape.backward(l);
  }
  auto evaluate = [&] {
    Tape tape;
    return loss(tape, store).scalar();
  };
  std::map<std::string, double> errors;
  for (auto& [name, entry] : store) {
    double worst = 0.0;
    for (Index i = 0; i < entry.value.size(); ++i) {
      double& x = entry.value.data()[i];
      const double saved = x;
      x = saved + h;
      const double up = evaluate();
      x = saved - h;
      const double down = evaluate();
      x = saved;
      const double numeric = (up - down) / (2.0 * h);
      worst = std::max(worst, relative_error(entry.grad.data()[i], numeric));
    }
    errors[name] = worst;
  }
  store.zero_grad();
  return errors;
}

namespace {

KnowledgeGraph toy_graph(Rng& rng) {
  constexpr std::uint32_t kEntities = 10, kRelations = 3, kTriples = 24;
  Vocabulary entities, relations;
  for (std::uint32_t e = 0; e < kEntities; ++e) entities.intern("e" + std::to_string(e));
  for (std::uint32_t r = 0; r < kRelations; ++r) relations.intern("r" + std::to_string(r));
  std::uniform_int_distribution<std::uint32_t> ent(0, kEntities - 1), rel(0, kRelations - 1);
  std::vector<Triple> triples;
  while (triples.size() < kTriples) {
    Triple t{EntityId{ent(rng)}, RelationId{rel(rng)}, EntityId{ent(rng)}};
    if (t.head != t.tail && std::find(triples.begin(), triples.end(), t) == triples.end()) {
      triples.push_back(t);
    }
  }
  return KnowledgeGraph(std::move(entities), std::move(relations), triples);
}

}  // namespace

GradcheckReport gradcheck(const GradcheckOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  if (options.batch < 1) throw UsageError("gradcheck batch must be >= 1");
  Rng rng = seeded_rng({options.seed, 0x6c4eULL});
  const KnowledgeGraph graph = toy_graph(rng);
  constexpr std::size_t kM = 3;
  const Batch batch = EpochBatches(graph, static_cast<std::size_t>(options.batch), kM, rng()).batch(0);

  const ModelDims dims{static_cast<Index>(graph.entity_count()),
                       static_cast<Index>(graph.relation_count()), options.dim};
  ModelParams model = ModelParams::init(dims, rng);
  // Non-zero biases so that every term of the gate equations is exercised.
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  for (auto& [name, entry] : model.store) {
    if (name.ends_with(".b") || name.ends_with(".b1") || name.ends_with(".b2")) {
      for (Index i = 0; i < entry.value.size(); ++i) entry.value.data()[i] = jitter(rng);
    }
  }

  TrainConfig config;
  config.dim = options.dim;
  config.batch_size = options.batch;
  const LossBuilder loss = [&](Tape& tape, ParamStore&) {
    return forward_batch(bind(tape, model), graph, batch, config).total;
  };

  GradcheckReport report;
  {
    Tape tape;
    report.loss = loss(tape, model.store).scalar();
  }
  const auto errors = finite_difference_errors(model.store, loss, options.step);
  for (const std::string& group : param_groups()) {
    GroupError g{group, 0.0, 0};
    for (const auto& [name, err] : errors) {
      if (param_group(name) != group) continue;
      g.max_rel_error = std::max(g.max_rel_error, err);
      g.scalars += static_cast<std::size_t>(model.store.at(name).value.size());
    }
    report.max_rel_error = std::max(report.max_rel_error, g.max_rel_error);
    report.groups.push_back(g);
  }
  report.passed = report.max_rel_error < options.tolerance;
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace kgad
