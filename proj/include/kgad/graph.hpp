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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace kgad {

using Rng = std::mt19937_64;

/// Dense, contiguous integer id; the tag keeps entity, relation and triple ids apart.
template <class Tag>
struct Id {
  std::uint32_t value = 0;

  constexpr Id() = default;
  constexpr explicit Id(std::uint32_t v) : value(v) {}
  constexpr auto operator<=>(const Id&) const = default;
  constexpr std::size_t index() const { return value; }
};

using EntityId = Id<struct EntityTag>;
using RelationId = Id<struct RelationTag>;
using TripleId = Id<struct TripleTag>;

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;

  constexpr auto operator<=>(const Triple&) const = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    std::uint64_t x = (std::uint64_t{t.head.value} << 32) ^ t.tail.value;
    x ^= std::uint64_t{t.relation.value} * 0x9e3779b97f4a7c15ULL;
    x ^= x >> 31;
    x *= 0xbf58476d1ce4e5b9ULL;
    return static_cast<std::size_t>(x ^ (x >> 29));
  }
};

/// Bidirectional label <-> id map with ids handed out in first-seen order.
class Vocabulary {
 public:
  std::uint32_t intern(std::string_view label);
  std::optional<std::uint32_t> find(std::string_view label) const;
  const std::string& label(std::uint32_t id) const { return labels_.at(id); }
  std::size_t size() const { return labels_.size(); }
  std::span<const std::string> labels() const { return labels_; }

  bool operator==(const Vocabulary& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

/// Immutable triple store with head/tail adjacency and exact membership.
///
/// Duplicate input triples are dropped (first occurrence keeps its position);
/// `duplicates_dropped()` reports how many. Every TripleId lives in exactly
/// one head bucket and one tail bucket.
class KnowledgeGraph {
 public:
  KnowledgeGraph(Vocabulary entities, Vocabulary relations, std::span<const Triple> triples);

  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }
  std::span<const Triple> triples() const { return triples_; }
  const Triple& triple(TripleId id) const;

  const Vocabulary& entities() const { return entities_; }
  const Vocabulary& relations() const { return relations_; }
  std::size_t entity_count() const { return entities_.size(); }
  std::size_t relation_count() const { return relations_.size(); }

  std::span<const TripleId> head_bucket(EntityId e) const { return head_index_.at(e.index()); }
  std::span<const TripleId> tail_bucket(EntityId e) const { return tail_index_.at(e.index()); }

  bool contains(const Triple& t) const { return ids_.contains(t); }
  std::optional<TripleId> find(const Triple& t) const;

  std::size_t duplicates_dropped() const { return duplicates_dropped_; }

  /// Label form of one triple, `head<TAB>relation<TAB>tail`.
  std::string format(const Triple& t) const;

 private:
  Vocabulary entities_;
  Vocabulary relations_;
  std::vector<Triple> triples_;
  std::vector<std::vector<TripleId>> head_index_;
  std::vector<std::vector<TripleId>> tail_index_;
  std::unordered_map<Triple, TripleId, TripleHash> ids_;
  std::size_t duplicates_dropped_ = 0;
};

/// Parses tab-separated `head relation tail` lines. Blank lines and lines
/// starting with '#' are skipped. Throws ParseError on malformed input.
KnowledgeGraph parse_triples(std::istream& in);
KnowledgeGraph load_triples(const std::filesystem::path& path);

void write_triples(const KnowledgeGraph& graph, std::ostream& out);
void save_triples(const KnowledgeGraph& graph, const std::filesystem::path& path);

/// Draws `m` triple ids from `bucket`, skipping `exclude` when given.
///
/// More than m candidates: m distinct draws. 1..m candidates: every candidate
/// once, the remainder filled uniformly with replacement. No candidate: m
/// copies of `fallback`.
std::vector<TripleId> sample_bucket(std::span<const TripleId> bucket, std::optional<TripleId> exclude,
                                    std::size_t m, TripleId fallback, Rng& rng);

/// m triples sharing the head of `t` (t itself excluded); self-copies when t's head is isolated.
std::vector<TripleId> head_neighbors(const KnowledgeGraph& g, TripleId t, std::size_t m, Rng& rng);
/// Tail-side mirror of head_neighbors.
std::vector<TripleId> tail_neighbors(const KnowledgeGraph& g, TripleId t, std::size_t m, Rng& rng);

/// ceil(mean over triples of (|head bucket| - 1 + |tail bucket| - 1)), at least 1.
std::size_t mean_neighbor_count(const KnowledgeGraph& g);

}  // namespace kgad
