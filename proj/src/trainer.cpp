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

#include "kgad/trainer.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "kgad/error.hpp"
#include "kgad/forward.hpp"
#include "kgad/log.hpp"

namespace kgad {

namespace {

std::map<std::string, Tensor> snapshot(const ParamStore& store) {
  std::map<std::string, Tensor> values;
  for (const auto& [name, entry] : store) values.emplace(name, entry.value);
  return values;
}

void restore(ParamStore& store, const std::map<std::string, Tensor>& values) {
  for (auto& [name, entry] : store) entry.value = values.at(name);
}

std::string coordinates(int epoch, std::size_t batch) {
  return "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch);
}

}  // namespace

std::size_t resolve_neighbor_count(const KnowledgeGraph& graph, const TrainConfig& config) {
  if (config.neighbor_count > 0) return static_cast<std::size_t>(config.neighbor_count);
  return mean_neighbor_count(graph);
}

TrainHistory fit(ParamStore& store, const KnowledgeGraph& graph, const TrainConfig& config,
                 std::size_t m, std::uint64_t seed, const StepFn& step) {
  config.validate();
  if (graph.size() == 0) throw Error("cannot train on an empty corpus");
  using Clock = std::chrono::steady_clock;
  const AdamOptions adam{config.lr};

  TrainHistory history;
  history.seed = seed;
  double best = std::numeric_limits<double>::infinity();
  double reference = best;
  int stale = 0;
  std::map<std::string, Tensor> best_values = snapshot(store);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = Clock::now();
    const std::uint64_t epoch_seed = seeded_rng({seed, 0xe0c4ULL, static_cast<std::uint64_t>(epoch)})();
    const EpochBatches batches(graph, static_cast<std::size_t>(config.batch_size), m, epoch_seed);
    EpochRecord rec;
    rec.epoch = epoch;
    std::size_t seen = 0;
    for (std::size_t bi = 0; bi < batches.batch_count(); ++bi) {
      const Batch batch = batches.batch(bi);
      try {
        Tape tape;
        store.zero_grad();
        const StepLoss loss = step(tape, store, batch);
        const double value = loss.total.scalar();
        if (!std::isfinite(value)) throw NonFiniteError("loss is " + std::to_string(value));
        tape.backward(loss.total);
        adam_step(store, adam);
        const double w = static_cast<double>(batch.size());
        rec.total += w * value;
        rec.margin += w * loss.margin;
        rec.consistency += w * loss.consistency;
        seen += batch.size();
      } catch (const NonFiniteError& e) {
        throw NonFiniteError("non-finite value at " + coordinates(epoch, bi) + ": " + e.what());
      }
    }
    for (auto& [name, entry] : store) {
      if (!entry.value.allFinite()) {
        throw NonFiniteError("non-finite parameter '" + name + "' after " +
                             coordinates(epoch, batches.batch_count() - 1));
      }
    }
    const double n = static_cast<double>(seen);
    rec.total /= n;
    rec.margin /= n;
    rec.consistency /= n;
    rec.seconds = std::chrono::duration<double>(Clock::now() - started).count();
    history.epochs.push_back(rec);
    log_debug("epoch " + std::to_string(epoch) + " loss " + std::to_string(rec.total) + " (" +
              std::to_string(rec.seconds) + " s)");

    if (rec.total < best) {
      best = rec.total;
      best_values = snapshot(store);
      history.selected_epoch = epoch;
    }
    if (config.early_stop_patience > 0) {
      if (rec.total < reference - config.early_stop_tolerance) {
        reference = rec.total;
        stale = 0;
      } else if (++stale >= config.early_stop_patience) {
        history.stopped_early = true;
        break;
      }
    }
  }
  restore(store, best_values);
  return history;
}

TrainedModel train(const LabeledCorpus& corpus, const TrainConfig& config, int run) {
  config.validate();
  const KnowledgeGraph& graph = corpus.graph;
  TrainConfig resolved = config;
  resolved.seed = config.seed + static_cast<std::uint64_t>(run);
  resolved.runs = 1;
  resolved.neighbor_count = static_cast<int>(resolve_neighbor_count(graph, config));

  ModelDims dims{static_cast<Index>(graph.entity_count()), static_cast<Index>(graph.relation_count()),
                 resolved.dim};
  Rng init_rng = seeded_rng({resolved.seed, 0x1417ULL});
  ModelParams model = ModelParams::init(dims, init_rng);

  const StepFn step = [&](Tape& tape, ParamStore&, const Batch& batch) {
    const BoundModel bound = bind(tape, model);
    const BatchLoss loss = forward_batch(bound, graph, batch, resolved);
    return StepLoss{loss.total, loss.margin.scalar(), loss.consistency.total.scalar()};
  };
  TrainHistory history = fit(model.store, graph, resolved, static_cast<std::size_t>(resolved.neighbor_count),
                             resolved.seed, step);
  history.run = run;
  log_info("run " + std::to_string(run) + ": " + std::to_string(history.epochs.size()) +
           " epochs, kept epoch " + std::to_string(history.selected_epoch));
  return {std::move(model), std::move(history), resolved};
}

std::vector<TrainedModel> train_multi(const LabeledCorpus& corpus, const TrainConfig& config) {
  config.validate();
  const auto runs = static_cast<std::size_t>(config.runs);
  std::vector<std::optional<TrainedModel>> slots(runs);
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.threads), runs);
  if (workers <= 1) {
    for (std::size_t r = 0; r < runs; ++r) slots[r] = train(corpus, config, static_cast<int>(r));
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < runs; r = next++) {
          try {
            slots[r] = train(corpus, config, static_cast<int>(r));
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  std::vector<TrainedModel> out;
  out.reserve(runs);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace kgad
