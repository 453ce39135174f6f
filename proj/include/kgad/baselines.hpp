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

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kgad/config.hpp"
#include "kgad/corruption.hpp"
#include "kgad/metrics.hpp"
#include "kgad/params.hpp"
#include "kgad/trainer.hpp"

namespace kgad {

enum class BaselineMethod { kTransE, kDistMult, kComplEx };

/// "transe", "distmult" or "complex"; anything else is a UsageError.
BaselineMethod parse_baseline_method(std::string_view name);
std::string to_string(BaselineMethod method);

// Anomaly scores (higher = more anomalous) of single triples.

/// ||h + r - t||_2.
template <typename H, typename R, typename T>
typename H::Scalar transe_score(const Eigen::MatrixBase<H>& h, const Eigen::MatrixBase<R>& r,
                                const Eigen::MatrixBase<T>& t) {
  return (h + r - t).norm();
}

/// -<h, r, t>.
template <typename H, typename R, typename T>
typename H::Scalar distmult_score(const Eigen::MatrixBase<H>& h, const Eigen::MatrixBase<R>& r,
                                  const Eigen::MatrixBase<T>& t) {
  return -(h.array() * r.array() * t.array()).sum();
}

/// -Re<h, r, conj(t)> with real and imaginary parts given separately.
template <typename D>
typename D::Scalar complex_score(const Eigen::MatrixBase<D>& h_re, const Eigen::MatrixBase<D>& h_im,
                                 const Eigen::MatrixBase<D>& r_re, const Eigen::MatrixBase<D>& r_im,
                                 const Eigen::MatrixBase<D>& t_re, const Eigen::MatrixBase<D>& t_im) {
  const auto hr = h_re.array(), hi = h_im.array(), rr = r_re.array(), ri = r_im.array();
  const auto tr = t_re.array(), ti = t_im.array();
  return -(hr * rr * tr + hi * rr * ti + hr * ri * ti - hi * ri * tr).sum();
}

struct BaselineModel {
  BaselineMethod method = BaselineMethod::kTransE;
  ParamStore store;
  TrainHistory history;
};

/// Embeddings of width config.dim trained with a per-sample hinge
/// mean(max(0, baseline_margin + s(pos) - s(neg))) over the shared negative
/// sampler. Seed config.seed + run.
BaselineModel train_baseline(BaselineMethod method, const LabeledCorpus& corpus,
                             const TrainConfig& config, int run = 0);

/// Score of every triple, indexed by TripleId.
std::vector<double> baseline_scores(const BaselineModel& model, const KnowledgeGraph& graph);

}  // namespace kgad
