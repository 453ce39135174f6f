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
#include <string>

#include "kgad/params.hpp"

namespace kgad {

/// On-disk model: parameter values, the training config and the fingerprints
/// of the vocabularies the parameters were trained against. Byte layout is
/// documented in docs/checkpoint_format.md.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::string config;  // flat `key = value` text
  std::uint64_t entity_fingerprint = 0;
  std::uint64_t relation_fingerprint = 0;
  ParamStore params;  // values only; Adam state is not persisted
};

void write_checkpoint(const Checkpoint& ckpt, std::ostream& out);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
/// Order-sensitive hash of a vocabulary's labels.
std::uint64_t fingerprint(const Vocabulary& vocab);

}  // namespace kgad
