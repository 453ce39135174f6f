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
#include <map>
#include <span>
#include <string>

#include "kgad/graph.hpp"
#include "kgad/tensor.hpp"

namespace kgad {

/// One trainable tensor plus its gradient accumulator and Adam state.
struct ParamEntry {
  Tensor value;
  Tensor grad;
  Tensor first_moment;
  Tensor second_moment;
  std::int64_t step = 0;
};

/// Named parameters in a deterministic (lexicographic) order.
class ParamStore {
 public:
  using Map = std::map<std::string, ParamEntry, std::less<>>;

  ParamEntry& add(const std::string& name, Tensor init);
  ParamEntry& at(std::string_view name);
  const ParamEntry& at(std::string_view name) const;
  bool contains(std::string_view name) const { return entries_.find(name) != entries_.end(); }

  void zero_grad();
  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;

  Map::iterator begin() { return entries_.begin(); }
  Map::iterator end() { return entries_.end(); }
  Map::const_iterator begin() const { return entries_.begin(); }
  Map::const_iterator end() const { return entries_.end(); }

  /// Values (only) compare equal, bit for bit.
  bool same_values(const ParamStore& other) const;

 private:
  Map entries_;
};

struct AdamOptions {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam update of every entry from its accumulated gradient.
void adam_step(ParamStore& store, const AdamOptions& options = {});

/// Uniform draws in +-sqrt(6 / (fan_in + fan_out)); for shape [r, c] fan_in = r
/// and fan_out = c, for shape [k] both equal k (returned as a 1 x k row).
Tensor xavier_init(std::span<const Index> shape, Rng& rng);
Tensor xavier_init(Index rows, Index cols, Rng& rng);

}  // namespace kgad
