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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace kgad {

inline constexpr const char* kToolVersion = "0.1.0";

/// 16 hex digits of the FNV-1a hash of a file's bytes.
std::string file_hash(const std::filesystem::path& path);

struct FileRecord {
  std::string path;
  std::string hash;
};

/// Provenance sidecar written next to every output artifact.
struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;  // argv after the program name
  std::string config;                  // resolved `key = value` text, may be empty
  std::vector<std::uint64_t> seeds;
  std::vector<FileRecord> inputs;
  std::vector<FileRecord> outputs;
  std::string started;   // UTC, ISO 8601
  std::string finished;

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);

  nlohmann::ordered_json to_json() const;
  /// Writes `<artifact>.manifest.json` and returns its path.
  std::filesystem::path write_beside(const std::filesystem::path& artifact) const;
};

/// Current UTC time as 2026-01-31T12:00:00Z.
std::string utc_timestamp(std::chrono::system_clock::time_point t = std::chrono::system_clock::now());

}  // namespace kgad
