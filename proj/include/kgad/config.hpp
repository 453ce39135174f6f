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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace kgad {

/// Seed used when neither a flag, a config file nor KGAD_SEED provides one.
inline constexpr std::uint64_t kDefaultSeed = 42;

/// Fixed seed for neighbor sampling at scoring time, independent of training.
inline constexpr std::uint64_t kScoringSeed = 0x5c0de5eedULL;

struct TrainConfig {
  int dim = 100;
  int batch_size = 256;
  double lr = 0.01;
  int epochs = 100;
  double alpha = 0.9;
  double beta = 0.3;
  double gamma = 0.5;
  int neighbor_count = 0;  // 0 picks mean_neighbor_count of the corpus
  std::uint64_t seed = kDefaultSeed;
  int runs = 10;
  bool aggregation_sigmoid = false;
  bool margin_literal = false;
  int early_stop_patience = 10;  // 0 disables early stopping
  double early_stop_tolerance = 1e-5;
  double baseline_margin = 1.0;
  int threads = 1;  // concurrent runs in train_multi

  /// Throws UsageError naming the first offending field.
  void validate() const;

  /// Applies one `key = value` assignment. Unknown keys raise a UsageError
  /// listing every valid key.
  void set(const std::string& key, const std::string& value);

  /// Canonical `key = value` text, one line per key in a fixed order.
  std::string to_text() const;

  bool operator==(const TrainConfig&) const = default;
};

std::vector<std::string> config_keys();

/// Applies a flat config document on top of `base`. `#` starts a comment.
TrainConfig parse_config(std::istream& in, TrainConfig base = {});
TrainConfig load_config(const std::filesystem::path& path, TrainConfig base = {});

/// KGAD_SEED from the environment, if set and numeric.
std::optional<std::uint64_t> env_seed();

/// Defaults with KGAD_SEED applied.
TrainConfig default_config();

}  // namespace kgad
