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

#include "kgad/params.hpp"

#include <cmath>
#include <cstring>

#include "kgad/error.hpp"

namespace kgad {

ParamEntry& ParamStore::add(const std::string& name, Tensor init) {
  if (contains(name)) throw Error("parameter '" + name + "' registered twice");
  ParamEntry e;
  e.grad = Tensor::Zero(init.rows(), init.cols());
  e.first_moment = Tensor::Zero(init.rows(), init.cols());
  e.second_moment = Tensor::Zero(init.rows(), init.cols());
  e.value = std::move(init);
  return entries_.emplace(name, std::move(e)).first->second;
}

ParamEntry& ParamStore::at(std::string_view name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw Error("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

const ParamEntry& ParamStore::at(std::string_view name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw Error("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& [name, e] : entries_) e.grad.setZero();
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, e] : entries_) n += static_cast<std::size_t>(e.value.size());
  return n;
}

bool ParamStore::same_values(const ParamStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (auto a = entries_.begin(), b = other.entries_.begin(); a != entries_.end(); ++a, ++b) {
    if (a->first != b->first) return false;
    const Tensor& x = a->second.value;
    const Tensor& y = b->second.value;
    if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
    if (std::memcmp(x.data(), y.data(), sizeof(double) * static_cast<std::size_t>(x.size())) != 0) {
      return false;
    }
  }
  return true;
}

void adam_step(ParamStore& store, const AdamOptions& o) {
  for (auto& [name, e] : store) {
    ++e.step;
    e.first_moment = o.beta1 * e.first_moment + (1.0 - o.beta1) * e.grad;
    e.second_moment = o.beta2 * e.second_moment + (1.0 - o.beta2) * e.grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(e.step));
    const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(e.step));
    e.value.array() -= o.lr * (e.first_moment.array() / c1) /
                       ((e.second_moment.array() / c2).sqrt() + o.eps);
  }
}

Tensor xavier_init(std::span<const Index> shape, Rng& rng) {
  if (shape.empty() || shape.size() > 2) throw ShapeError("xavier_init: shape must have 1 or 2 dims");
  const Index rows = shape.size() == 2 ? shape[0] : 1;
  const Index cols = shape.back();
  const double fan_in = static_cast<double>(shape.front());
  const double fan_out = static_cast<double>(shape.back());
  if (rows <= 0 || cols <= 0) throw ShapeError("xavier_init: dims must be positive");
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> u(-bound, bound);
  Tensor t(rows, cols);
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
  return t;
}

Tensor xavier_init(Index rows, Index cols, Rng& rng) {
  const Index shape[] = {rows, cols};
  return xavier_init(shape, rng);
}

}  // namespace kgad
