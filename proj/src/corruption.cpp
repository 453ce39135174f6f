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

#include "kgad/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <unordered_set>

#include "kgad/error.hpp"
#include "kgad/log.hpp"

namespace kgad {

SealedLabels::SealedLabels(std::vector<std::uint8_t> labels) : labels_(std::move(labels)) {
  for (auto l : labels_) {
    if (l > 1) throw Error("labels must be 0 or 1");
    anomalies_ += l;
  }
}

SealedLabels::SealedLabels(const SealedLabels& other)
    : labels_(other.labels_), anomalies_(other.anomalies_), reads_(other.reads_.load()) {}

SealedLabels& SealedLabels::operator=(const SealedLabels& other) {
  labels_ = other.labels_;
  anomalies_ = other.anomalies_;
  reads_.store(other.reads_.load());
  return *this;
}

std::span<const std::uint8_t> SealedLabels::read() const {
  reads_.fetch_add(1);
  return labels_;
}

double LabeledCorpus::anomaly_ratio() const {
  if (clean_count == 0) return 0.0;
  return static_cast<double>(labels.anomaly_count()) / static_cast<double>(clean_count);
}

Rng seeded_rng(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  for (std::uint64_t p : parts) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

namespace {

EntityId other_entity(EntityId current, std::size_t entity_count, Rng& rng) {
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(entity_count - 2));
  std::uint32_t e = pick(rng);
  if (e >= current.value) ++e;
  return EntityId(e);
}

}  // namespace

LabeledCorpus inject_anomalies(const KnowledgeGraph& clean, double ratio, Rng& rng) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw UsageError("anomaly ratio must lie in (0, 1)");
  if (clean.empty()) throw Error("cannot corrupt an empty graph");
  if (clean.entity_count() < 2) throw Error("corruption needs at least 2 entities");

  const auto target = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(clean.size())));
  std::vector<Triple> triples(clean.triples().begin(), clean.triples().end());
  std::unordered_set<Triple, TripleHash> injected;
  injected.reserve(target);
  std::uniform_int_distribution<std::size_t> pick_triple(0, clean.size() - 1);
  std::bernoulli_distribution coin(0.5);

  for (std::size_t k = 0; k < target; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxCorruptionAttempts && !placed; ++attempt) {
      Triple candidate = clean.triples()[pick_triple(rng)];
      if (coin(rng)) {
        candidate.head = other_entity(candidate.head, clean.entity_count(), rng);
      } else {
        candidate.tail = other_entity(candidate.tail, clean.entity_count(), rng);
      }
      if (clean.contains(candidate) || injected.contains(candidate)) continue;
      injected.insert(candidate);
      triples.push_back(candidate);
      placed = true;
    }
    if (!placed) {
      throw Error("graph too dense to corrupt: " + std::to_string(kMaxCorruptionAttempts) +
                  " rejected candidates for anomaly " + std::to_string(k));
    }
  }

  std::vector<std::uint8_t> labels(clean.size(), 0);
  labels.resize(triples.size(), 1);
  return LabeledCorpus{KnowledgeGraph(clean.entities(), clean.relations(), triples),
                       SealedLabels(std::move(labels)), clean.size()};
}

Negative sample_negative(const Triple& anchor, const KnowledgeGraph& graph, Rng& rng) {
  if (graph.entity_count() < 2) throw Error("negative sampling needs at least 2 entities");
  std::bernoulli_distribution coin(0.5);
  // Two entities leave no room for the self-loop rule.
  const bool forbid_new_loops = graph.entity_count() > 2 && anchor.head != anchor.tail;
  for (int attempt = 0; attempt < kMaxCorruptionAttempts; ++attempt) {
    Negative neg{anchor, coin(rng)};
    if (neg.head_replaced) {
      neg.triple.head = other_entity(anchor.head, graph.entity_count(), rng);
    } else {
      neg.triple.tail = other_entity(anchor.tail, graph.entity_count(), rng);
    }
    if (forbid_new_loops && neg.triple.head == neg.triple.tail) continue;
    if (!graph.contains(neg.triple)) return neg;
  }
  throw Error("graph too dense to sample a negative for " + graph.format(anchor));
}

void negative_neighbors(const KnowledgeGraph& graph, TripleId anchor, const Negative& negative,
                        std::size_t m, Rng& rng, std::vector<TripleId>& head_out,
                        std::vector<TripleId>& tail_out) {
  auto head = sample_bucket(graph.head_bucket(negative.triple.head), std::nullopt, m, anchor, rng);
  auto tail = sample_bucket(graph.tail_bucket(negative.triple.tail), std::nullopt, m, anchor, rng);
  head_out.insert(head_out.end(), head.begin(), head.end());
  tail_out.insert(tail_out.end(), tail.begin(), tail.end());
}

EpochBatches::EpochBatches(const KnowledgeGraph& graph, std::size_t batch_size, std::size_t m,
                           std::uint64_t epoch_seed)
    : graph_(&graph), batch_size_(batch_size), m_(m), seed_(epoch_seed) {
  if (batch_size == 0) throw UsageError("batch size must be at least 1");
  if (m == 0) throw UsageError("neighbor count must be at least 1");
  order_.resize(graph.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = TripleId(static_cast<std::uint32_t>(i));
  Rng rng = seeded_rng({epoch_seed});
  std::shuffle(order_.begin(), order_.end(), rng);
}

Batch EpochBatches::batch(std::size_t index) const {
  if (index >= batch_count()) throw Error("batch index out of range");
  const std::size_t begin = index * batch_size_;
  const std::size_t end = std::min(begin + batch_size_, order_.size());
  Rng rng = seeded_rng({seed_, index});

  Batch b;
  b.m = m_;
  b.anchors.assign(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(end));
  const std::size_t n = b.anchors.size();
  b.negatives.reserve(n);
  b.anchor_head_nbrs.reserve(n * m_);
  b.anchor_tail_nbrs.reserve(n * m_);
  b.negative_head_nbrs.reserve(n * m_);
  b.negative_tail_nbrs.reserve(n * m_);
  for (TripleId a : b.anchors) {
    auto h = head_neighbors(*graph_, a, m_, rng);
    auto t = tail_neighbors(*graph_, a, m_, rng);
    b.anchor_head_nbrs.insert(b.anchor_head_nbrs.end(), h.begin(), h.end());
    b.anchor_tail_nbrs.insert(b.anchor_tail_nbrs.end(), t.begin(), t.end());
    b.negatives.push_back(sample_negative(graph_->triple(a), *graph_, rng));
    negative_neighbors(*graph_, a, b.negatives.back(), m_, rng, b.negative_head_nbrs,
                       b.negative_tail_nbrs);
  }
  return b;
}

EpochBatches make_batches(const LabeledCorpus& corpus, std::size_t batch_size, std::size_t m,
                          std::uint64_t epoch_seed) {
  return EpochBatches(corpus.graph, batch_size, m, epoch_seed);
}

void write_labeled_corpus(const LabeledCorpus& corpus, std::ostream& out) {
  const auto labels = corpus.labels.read();
  const auto triples = corpus.graph.triples();
  for (std::size_t i = 0; i < triples.size(); ++i) {
    out << corpus.graph.format(triples[i]) << '\t' << static_cast<int>(labels[i]) << '\n';
  }
}

void save_labeled_corpus(const LabeledCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_labeled_corpus(corpus, out);
}

LabeledCorpus parse_labeled_corpus(std::istream& in) {
  Vocabulary entities;
  Vocabulary relations;
  std::vector<Triple> triples;
  std::vector<std::uint8_t> labels;
  std::unordered_set<Triple, TripleHash> seen;
  std::size_t duplicates = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      const auto tab = rest.find('\t');
      fields.push_back(rest.substr(0, tab));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    if (fields.size() != 4) {
      throw ParseError("expected 4 tab-separated fields, found " + std::to_string(fields.size()),
                       line_no);
    }
    if (fields[3] != "0" && fields[3] != "1") throw ParseError("label must be 0 or 1", line_no);
    for (std::size_t i = 0; i < 3; ++i) {
      if (fields[i].empty()) throw ParseError("empty field", line_no);
    }
    const Triple t{EntityId(entities.intern(fields[0])), RelationId(relations.intern(fields[1])),
                   EntityId(entities.intern(fields[2]))};
    if (!seen.insert(t).second) {
      ++duplicates;
      continue;
    }
    triples.push_back(t);
    labels.push_back(fields[3] == "1" ? 1 : 0);
  }
  if (triples.empty()) throw ParseError("no triples in input", 0);
  if (duplicates > 0) log_info("dropped " + std::to_string(duplicates) + " duplicate triples");
  SealedLabels sealed(std::move(labels));
  const std::size_t clean = triples.size() - sealed.anomaly_count();
  return LabeledCorpus{KnowledgeGraph(std::move(entities), std::move(relations), triples),
                       std::move(sealed), clean};
}

LabeledCorpus load_labeled_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file " + path.string());
  try {
    return parse_labeled_corpus(in);
  } catch (const ParseError& e) {
    throw e.in_file(path.string());
  }
}

}  // namespace kgad
