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

#include "kgad/manifest.hpp"

#include <ctime>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include "kgad/checkpoint.hpp"
#include "kgad/error.hpp"

namespace kgad {

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << fnv1a(bytes);
  return out.str();
}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs.push_back({path.string(), file_hash(path)});
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs.push_back({path.string(), file_hash(path)});
}

nlohmann::ordered_json RunManifest::to_json() const {
  auto files = [](const std::vector<FileRecord>& records) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const FileRecord& r : records) arr.push_back({{"path", r.path}, {"fnv1a64", r.hash}});
    return arr;
  };
  nlohmann::ordered_json doc;
  doc["tool"] = "kgad";
  doc["version"] = kToolVersion;
  doc["command"] = command;
  doc["arguments"] = arguments;
  doc["config"] = config;
  doc["seeds"] = seeds;
  doc["inputs"] = files(inputs);
  doc["outputs"] = files(outputs);
  doc["started"] = started;
  doc["finished"] = finished;
  return doc;
}

std::filesystem::path RunManifest::write_beside(const std::filesystem::path& artifact) const {
  std::filesystem::path out = artifact;
  out += ".manifest.json";
  std::ofstream f(out);
  if (!f) throw Error("cannot write " + out.string());
  f << to_json().dump(2) << '\n';
  return out;
}

std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t raw = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&raw, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

}  // namespace kgad
