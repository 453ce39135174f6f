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

#include "kgad/report.hpp"

#include <sstream>

namespace kgad {

namespace {

nlohmann::ordered_json per_k(const std::map<int, double>& values) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& [k, v] : values) out[std::to_string(k)] = v;
  return out;
}

nlohmann::ordered_json metrics_block(const RunMetrics& m) {
  nlohmann::ordered_json b;
  b["precision_at"] = per_k(m.precision_at);
  b["recall_at"] = per_k(m.recall_at);
  b["auc"] = m.auc;
  b["anomaly_mean_score"] = m.anomaly_mean_score;
  b["clean_mean_score"] = m.clean_mean_score;
  return b;
}

}  // namespace

MetricsReport make_report(const LabeledCorpus& corpus, std::string method) {
  MetricsReport r;
  r.method = std::move(method);
  r.triple_count = corpus.graph.size();
  r.anomaly_count = corpus.labels.anomaly_count();
  return r;
}

nlohmann::ordered_json metrics_json(const MetricsReport& report) {
  const RunMetrics mean = report.mean();
  nlohmann::ordered_json doc = metrics_block(mean);

  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    nlohmann::ordered_json b;
    b["run"] = i;
    if (i < report.seeds.size()) b["seed"] = report.seeds[i];
    const nlohmann::ordered_json block = metrics_block(report.runs[i]);
    for (const auto& [k, v] : block.items()) b[k] = v;
    runs.push_back(std::move(b));
  }
  doc["runs"] = std::move(runs);

  nlohmann::ordered_json m = metrics_block(mean);
  const std::size_t clean = report.triple_count - report.anomaly_count;
  m["method"] = report.method;
  m["run_count"] = report.runs.size();
  m["triple_count"] = report.triple_count;
  m["anomaly_count"] = report.anomaly_count;
  m["anomaly_ratio_of_clean"] = clean ? static_cast<double>(report.anomaly_count) / clean : 0.0;
  m["anomaly_ratio_of_total"] =
      report.triple_count ? static_cast<double>(report.anomaly_count) / report.triple_count : 0.0;
  doc["mean"] = std::move(m);
  return doc;
}

std::string metrics_csv(const MetricsReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "method,run,k_percent,precision,recall\n";
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    for (const auto& [k, p] : report.runs[i].precision_at) {
      out << report.method << ',' << i << ',' << k << ',' << p << ',' << report.runs[i].recall_at.at(k)
          << '\n';
    }
  }
  return out.str();
}

nlohmann::ordered_json history_json(const TrainHistory& history) {
  nlohmann::ordered_json doc;
  doc["run"] = history.run;
  doc["seed"] = history.seed;
  doc["selected_epoch"] = history.selected_epoch;
  doc["stopped_early"] = history.stopped_early;
  nlohmann::ordered_json epochs = nlohmann::ordered_json::array();
  for (const EpochRecord& e : history.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"total", e.total},
                      {"margin", e.margin},
                      {"consistency", e.consistency},
                      {"seconds", e.seconds}});
  }
  doc["epochs"] = std::move(epochs);
  return doc;
}

std::string dump(const nlohmann::ordered_json& doc) { return doc.dump(2) + "\n"; }

}  // namespace kgad
