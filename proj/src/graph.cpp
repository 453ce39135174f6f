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

#include "kgad/graph.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "kgad/error.hpp"
#include "kgad/log.hpp"

namespace kgad {

std::uint32_t Vocabulary::intern(std::string_view label) {
  auto it = ids_.find(std::string(label));
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(labels_.size());
  labels_.emplace_back(label);
  ids_.emplace(labels_.back(), id);
  return id;
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view label) const {
  auto it = ids_.find(std::string(label));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

KnowledgeGraph::KnowledgeGraph(Vocabulary entities, Vocabulary relations,
                               std::span<const Triple> triples)
    : entities_(std::move(entities)),
      relations_(std::move(relations)),
      head_index_(entities_.size()),
      tail_index_(entities_.size()) {
  triples_.reserve(triples.size());
  ids_.reserve(triples.size());
  for (const Triple& t : triples) {
    if (t.head.index() >= entities_.size() || t.tail.index() >= entities_.size() ||
        t.relation.index() >= relations_.size()) {
      throw Error("triple references an id outside the vocabulary");
    }
    const TripleId id(static_cast<std::uint32_t>(triples_.size()));
    if (!ids_.emplace(t, id).second) {
      ++duplicates_dropped_;
      continue;
    }
    triples_.push_back(t);
    head_index_[t.head.index()].push_back(id);
    tail_index_[t.tail.index()].push_back(id);
  }
}

const Triple& KnowledgeGraph::triple(TripleId id) const {
  if (id.index() >= triples_.size()) {
    throw Error("invalid triple id " + std::to_string(id.value) + " (graph has " +
                std::to_string(triples_.size()) + " triples)");
  }
  return triples_[id.index()];
}

std::optional<TripleId> KnowledgeGraph::find(const Triple& t) const {
  auto it = ids_.find(t);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::string KnowledgeGraph::format(const Triple& t) const {
  return entities_.label(t.head.value) + '\t' + relations_.label(t.relation.value) + '\t' +
         entities_.label(t.tail.value);
}

KnowledgeGraph parse_triples(std::istream& in) {
  Vocabulary entities;
  Vocabulary relations;
  std::vector<Triple> triples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      const auto tab = rest.find('\t');
      fields.push_back(rest.substr(0, tab));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    if (fields.size() != 3) {
      throw ParseError("expected 3 tab-separated fields, found " + std::to_string(fields.size()),
                       line_no);
    }
    for (auto f : fields) {
      if (f.empty()) throw ParseError("empty field", line_no);
    }
    const EntityId h(entities.intern(fields[0]));
    const RelationId r(relations.intern(fields[1]));
    const EntityId t(entities.intern(fields[2]));
    triples.push_back({h, r, t});
  }
  if (triples.empty()) throw ParseError("no triples in input", 0);
  KnowledgeGraph g(std::move(entities), std::move(relations), triples);
  if (g.duplicates_dropped() > 0) {
    log_info("dropped " + std::to_string(g.duplicates_dropped()) + " duplicate triples");
  }
  return g;
}

KnowledgeGraph load_triples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open triple file " + path.string());
  try {
    return parse_triples(in);
  } catch (const ParseError& e) {
    throw e.in_file(path.string());
  }
}

void write_triples(const KnowledgeGraph& graph, std::ostream& out) {
  for (const Triple& t : graph.triples()) out << graph.format(t) << '\n';
}

void save_triples(const KnowledgeGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_triples(graph, out);
}

std::vector<TripleId> sample_bucket(std::span<const TripleId> bucket, std::optional<TripleId> exclude,
                                    std::size_t m, TripleId fallback, Rng& rng) {
  if (m == 0) throw Error("neighbor count must be at least 1");
  std::vector<TripleId> candidates;
  candidates.reserve(bucket.size());
  for (TripleId id : bucket) {
    if (!exclude || id != *exclude) candidates.push_back(id);
  }
  if (candidates.empty()) return std::vector<TripleId>(m, fallback);

  if (candidates.size() > m) {
    // Partial Fisher-Yates: the first m slots end up a uniform m-subset.
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
      std::swap(candidates[i], candidates[pick(rng)]);
    }
    candidates.resize(m);
    return candidates;
  }
  std::vector<TripleId> out = candidates;
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  while (out.size() < m) out.push_back(candidates[pick(rng)]);
  return out;
}

std::vector<TripleId> head_neighbors(const KnowledgeGraph& g, TripleId t, std::size_t m, Rng& rng) {
  const Triple& anchor = g.triple(t);
  return sample_bucket(g.head_bucket(anchor.head), t, m, t, rng);
}

std::vector<TripleId> tail_neighbors(const KnowledgeGraph& g, TripleId t, std::size_t m, Rng& rng) {
  const Triple& anchor = g.triple(t);
  return sample_bucket(g.tail_bucket(anchor.tail), t, m, t, rng);
}

std::size_t mean_neighbor_count(const KnowledgeGraph& g) {
  if (g.empty()) throw Error("mean_neighbor_count of an empty graph");
  // Integer total keeps the ceiling exact.
  std::uint64_t total = 0;
  for (const Triple& t : g.triples()) {
    total += g.head_bucket(t.head).size() - 1;
    total += g.tail_bucket(t.tail).size() - 1;
  }
  const std::uint64_t n = g.size();
  const std::uint64_t ceil = (total + n - 1) / n;
  return std::max<std::uint64_t>(ceil, 1);
}

}  // namespace kgad
