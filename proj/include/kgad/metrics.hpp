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

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "kgad/graph.hpp"

namespace kgad {

struct ScoredTriple {
  TripleId id;
  double score = 0.0;
  bool operator==(const ScoredTriple&) const = default;
};

/// Triples sorted by score descending, ties by ascending id.
struct RankedScores {
  std::vector<ScoredTriple> entries;

  std::size_t size() const { return entries.size(); }
  bool operator==(const RankedScores&) const = default;
};

/// Ranks scores indexed by TripleId. Throws on a non-finite score.
RankedScores rank_scores(std::span<const double> scores);

/// K = round(k_fraction * n); throws UsageError when K is 0 or k_fraction is
/// outside (0, 1].
std::size_t top_k_count(std::size_t n, double k_fraction);

/// Anomalies among the top K, divided by K. Labels are indexed by TripleId.
double precision_at_k(const RankedScores& ranked, std::span<const std::uint8_t> labels,
                      double k_fraction);
/// Anomalies among the top K, divided by all anomalies.
double recall_at_k(const RankedScores& ranked, std::span<const std::uint8_t> labels,
                   double k_fraction);
/// Mann-Whitney ROC area; tied scores count one half.
double auc(const RankedScores& ranked, std::span<const std::uint8_t> labels);

/// The K% columns reported.
inline constexpr std::array<int, 5> kReportedPercents = {1, 2, 3, 4, 5};

struct RunMetrics {
  std::map<int, double> precision_at;  // keyed by K%
  std::map<int, double> recall_at;
  double auc = 0.0;
  double anomaly_mean_score = 0.0;
  double clean_mean_score = 0.0;
};

RunMetrics evaluate(const RankedScores& ranked, std::span<const std::uint8_t> labels);

/// Field-wise arithmetic mean.
RunMetrics mean_metrics(std::span<const RunMetrics> runs);

}  // namespace kgad
