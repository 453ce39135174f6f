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

#include "kgad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kgad/error.hpp"

namespace kgad {

namespace {

void check_labels(const RankedScores& ranked, std::span<const std::uint8_t> labels) {
  if (ranked.size() != labels.size()) {
    throw ShapeError("ranking has " + std::to_string(ranked.size()) + " triples but " +
                     std::to_string(labels.size()) + " labels");
  }
}

std::size_t hits_in_top(const RankedScores& ranked, std::span<const std::uint8_t> labels,
                        std::size_t k) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += labels[ranked.entries[i].id.index()] != 0;
  return hits;
}

}  // namespace

RankedScores rank_scores(std::span<const double> scores) {
  RankedScores r;
  r.entries.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw NonFiniteError("score of triple " + std::to_string(i) + " is not finite");
    r.entries.push_back({TripleId{static_cast<std::uint32_t>(i)}, scores[i]});
  }
  std::sort(r.entries.begin(), r.entries.end(), [](const ScoredTriple& a, const ScoredTriple& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id.value < b.id.value;
  });
  return r;
}

std::size_t top_k_count(std::size_t n, double k_fraction) {
  if (!(k_fraction > 0.0 && k_fraction <= 1.0)) throw UsageError("k fraction must lie in (0, 1]");
  const auto k = static_cast<std::size_t>(std::llround(k_fraction * static_cast<double>(n)));
  if (k == 0) throw UsageError("top K rounds to zero triples");
  return std::min(k, n);
}

double precision_at_k(const RankedScores& ranked, std::span<const std::uint8_t> labels,
                      double k_fraction) {
  check_labels(ranked, labels);
  const std::size_t k = top_k_count(ranked.size(), k_fraction);
  return static_cast<double>(hits_in_top(ranked, labels, k)) / static_cast<double>(k);
}

double recall_at_k(const RankedScores& ranked, std::span<const std::uint8_t> labels,
                   double k_fraction) {
  check_labels(ranked, labels);
  const auto total = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(),
                                                            [](std::uint8_t l) { return l != 0; }));
  if (total == 0) throw UsageError("recall needs at least one anomaly");
  const std::size_t k = top_k_count(ranked.size(), k_fraction);
  return static_cast<double>(hits_in_top(ranked, labels, k)) / static_cast<double>(total);
}

double auc(const RankedScores& ranked, std::span<const std::uint8_t> labels) {
  check_labels(ranked, labels);
  const std::size_t n = ranked.size();
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  // Ascending ranks 1..n; the ranking is descending, so walk it from the end.
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && ranked.entries[j].score == ranked.entries[i].score) ++j;
    // Descending positions [i, j) hold ascending ranks n-j+1 .. n-i.
    const double avg_rank = (static_cast<double>(n - j + 1) + static_cast<double>(n - i)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[ranked.entries[k].id.index()] != 0) {
        positive_rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) throw UsageError("auc needs both anomalous and clean triples");
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

RunMetrics evaluate(const RankedScores& ranked, std::span<const std::uint8_t> labels) {
  RunMetrics m;
  for (int k : kReportedPercents) {
    m.precision_at[k] = precision_at_k(ranked, labels, k / 100.0);
    m.recall_at[k] = recall_at_k(ranked, labels, k / 100.0);
  }
  m.auc = auc(ranked, labels);
  double anomaly_sum = 0.0, clean_sum = 0.0;
  std::size_t anomalies = 0;
  for (const ScoredTriple& e : ranked.entries) {
    if (labels[e.id.index()] != 0) {
      anomaly_sum += e.score;
      ++anomalies;
    } else {
      clean_sum += e.score;
    }
  }
  m.anomaly_mean_score = anomaly_sum / static_cast<double>(anomalies);
  m.clean_mean_score = clean_sum / static_cast<double>(ranked.size() - anomalies);
  return m;
}

RunMetrics mean_metrics(std::span<const RunMetrics> runs) {
  if (runs.empty()) throw UsageError("no runs to average");
  const double n = static_cast<double>(runs.size());
  RunMetrics mean;
  for (const RunMetrics& r : runs) {
    for (const auto& [k, v] : r.precision_at) mean.precision_at[k] += v;
    for (const auto& [k, v] : r.recall_at) mean.recall_at[k] += v;
    mean.auc += r.auc;
    mean.anomaly_mean_score += r.anomaly_mean_score;
    mean.clean_mean_score += r.clean_mean_score;
  }
  for (auto& [k, v] : mean.precision_at) v /= n;
  for (auto& [k, v] : mean.recall_at) v /= n;
  mean.auc /= n;
  mean.anomaly_mean_score /= n;
  mean.clean_mean_score /= n;
  return mean;
}

}  // namespace kgad
