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

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgad/corruption.hpp"
#include "kgad/metrics.hpp"
#include "kgad/trainer.hpp"

namespace kgad {

/// Per-run metrics of one method on one corpus.
struct MetricsReport {
  std::string method = "adkgd";
  std::vector<RunMetrics> runs;
  std::vector<std::uint64_t> seeds;  // one per run
  std::size_t triple_count = 0;
  std::size_t anomaly_count = 0;

  RunMetrics mean() const { return mean_metrics(runs); }
};

/// Builds the report skeleton (counts) for a corpus. Reads no labels.
MetricsReport make_report(const LabeledCorpus& corpus, std::string method);

/// Top-level keys: precision_at, recall_at, auc, anomaly_mean_score,
/// clean_mean_score (all mean over runs), runs (per-run blocks) and mean
/// (the same means plus corpus counts and both anomaly-ratio readings).
nlohmann::ordered_json metrics_json(const MetricsReport& report);

/// Rows `method,run,k_percent,precision,recall`, one per K per run.
std::string metrics_csv(const MetricsReport& report);

nlohmann::ordered_json history_json(const TrainHistory& history);

/// Serialises with fixed formatting (2-space indent, trailing newline).
std::string dump(const nlohmann::ordered_json& doc);

}  // namespace kgad
