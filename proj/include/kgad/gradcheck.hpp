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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "kgad/config.hpp"
#include "kgad/params.hpp"
#include "kgad/tensor.hpp"

namespace kgad {

/// Denominator floor of relative_error, so gradients that are numerically
/// zero compare on an absolute scale.
inline constexpr double kRelativeErrorFloor = 1e-6;

/// |analytic - numeric| / max(|analytic|, |numeric|, kRelativeErrorFloor).
double relative_error(double analytic, double numeric);

using LossBuilder = std::function<Var(Tape&, ParamStore&)>;

/// Analytic gradients of `loss` against central differences with step h for
/// every scalar in `store`; returns the max relative error per tensor name.
/// Values are restored afterwards.
std::map<std::string, double> finite_difference_errors(ParamStore& store, const LossBuilder& loss,
                                                       double h = 1e-5);

struct GradcheckOptions {
  int dim = 8;
  int batch = 4;
  std::uint64_t seed = kDefaultSeed;
  double step = 1e-5;
  double tolerance = 1e-4;
};

struct GroupError {
  std::string group;
  double max_rel_error = 0.0;
  std::size_t scalars = 0;
};

struct GradcheckReport {
  std::vector<GroupError> groups;  // one per parameter group, declaration order
  double max_rel_error = 0.0;
  double loss = 0.0;
  double seconds = 0.0;
  bool passed = false;
};

/// Full objective (both channels, four aggregations, margin and the three KL
/// terms) on a small random graph.
GradcheckReport gradcheck(const GradcheckOptions& options = {});

}  // namespace kgad
