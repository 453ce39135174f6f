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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <vector>

#include "kgad/graph.hpp"

namespace kgad {

/// Ground-truth anomaly flags with an access counter.
///
/// Training code never needs labels; the counter lets tests prove it.
/// `size()` and `anomaly_count()` are bookkeeping and do not count as reads.
class SealedLabels {
 public:
  SealedLabels() = default;
  explicit SealedLabels(std::vector<std::uint8_t> labels);
  SealedLabels(const SealedLabels& other);
  SealedLabels& operator=(const SealedLabels& other);

  std::span<const std::uint8_t> read() const;
  std::size_t size() const { return labels_.size(); }
  std::size_t anomaly_count() const { return anomalies_; }
  std::size_t read_count() const { return reads_.load(); }

 private:
  std::vector<std::uint8_t> labels_;
  std::size_t anomalies_ = 0;
  mutable std::atomic<std::size_t> reads_{0};
};

/// A graph with injected anomalies. As produced by inject_anomalies, clean
/// triples keep ids [0, clean_count) and injected ones follow.
struct LabeledCorpus {
  KnowledgeGraph graph;
  SealedLabels labels;
  std::size_t clean_count = 0;

  /// injected / clean, the ratio the corpus was generated with.
  double anomaly_ratio() const;
};

/// Maximum rejection-sampling attempts before a corruption is declared impossible.
inline constexpr int kMaxCorruptionAttempts = 1000;

/// Adds round(ratio * |clean|) corrupted triples: a uniformly drawn clean
/// triple gets its head or tail (fair coin) replaced by a uniform entity;
/// candidates present in clean or already injected are rejected.
LabeledCorpus inject_anomalies(const KnowledgeGraph& clean, double ratio, Rng& rng);

/// A corrupted copy of `anchor` that is absent from `graph`. Head or tail
/// (fair coin) is replaced by a different entity; a replacement that would
/// turn a non-loop anchor into a self-loop is redrawn when the graph has
/// more than two entities.
struct Negative {
  Triple triple;
  bool head_replaced = false;

  bool operator==(const Negative& other) const = default;
};

Negative sample_negative(const Triple& anchor, const KnowledgeGraph& graph, Rng& rng);

/// One training batch. Neighbor lists are stored flat, row i occupying
/// [i*m, (i+1)*m).
struct Batch {
  std::size_t m = 0;
  std::vector<TripleId> anchors;
  std::vector<Negative> negatives;
  std::vector<TripleId> anchor_head_nbrs;
  std::vector<TripleId> anchor_tail_nbrs;
  std::vector<TripleId> negative_head_nbrs;
  std::vector<TripleId> negative_tail_nbrs;

  std::size_t size() const { return anchors.size(); }
  bool operator==(const Batch& other) const = default;
};

/// Head/tail neighbor lists of a negative: the replaced side draws from the
/// substitute entity's bucket, the kept side from the original entity's bucket.
/// Empty buckets fall back to the anchor the negative came from.
void negative_neighbors(const KnowledgeGraph& graph, TripleId anchor, const Negative& negative,
                        std::size_t m, Rng& rng, std::vector<TripleId>& head_out,
                        std::vector<TripleId>& tail_out);

/// Deterministic batch stream for one epoch. The triple order is a shuffle
/// seeded by `epoch_seed`; batch b draws its negatives and neighbors from an
/// rng seeded by (epoch_seed, b), so batches can be built in any order.
class EpochBatches {
 public:
  EpochBatches(const KnowledgeGraph& graph, std::size_t batch_size, std::size_t m,
               std::uint64_t epoch_seed);

  std::size_t batch_count() const { return (order_.size() + batch_size_ - 1) / batch_size_; }
  Batch batch(std::size_t index) const;

 private:
  const KnowledgeGraph* graph_;
  std::size_t batch_size_;
  std::size_t m_;
  std::uint64_t seed_;
  std::vector<TripleId> order_;
};

EpochBatches make_batches(const LabeledCorpus& corpus, std::size_t batch_size, std::size_t m,
                          std::uint64_t epoch_seed);

/// Rng seeded from a list of integers via std::seed_seq.
Rng seeded_rng(std::initializer_list<std::uint64_t> parts);

/// Four-column labeled corpus file: `head<TAB>relation<TAB>tail<TAB>0|1`.
void write_labeled_corpus(const LabeledCorpus& corpus, std::ostream& out);
void save_labeled_corpus(const LabeledCorpus& corpus, const std::filesystem::path& path);
LabeledCorpus parse_labeled_corpus(std::istream& in);
LabeledCorpus load_labeled_corpus(const std::filesystem::path& path);

}  // namespace kgad
