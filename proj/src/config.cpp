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

#include "kgad/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>

#include "kgad/error.hpp"

namespace kgad {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw UsageError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "on" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "off" || text == "no") return false;
  throw UsageError("config key '" + key + "': expected a boolean, got '" + text + "'");
}

// Shortest text that parses back to the same double.
std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct Field {
  const char* key;
  std::function<void(TrainConfig&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

template <typename T>
Field field(const char* key, T TrainConfig::*member) {
  Field f;
  f.key = key;
  f.set = [key, member](TrainConfig& c, const std::string& v) {
    if constexpr (std::is_same_v<T, bool>) {
      c.*member = parse_bool(key, v);
    } else {
      c.*member = parse_number<T>(key, v);
    }
  };
  f.get = [member](const TrainConfig& c) -> std::string {
    if constexpr (std::is_same_v<T, bool>) {
      return c.*member ? "true" : "false";
    } else if constexpr (std::is_floating_point_v<T>) {
      return format_double(c.*member);
    } else {
      return std::to_string(c.*member);
    }
  };
  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = {
      field("dim", &TrainConfig::dim),
      field("batch_size", &TrainConfig::batch_size),
      field("lr", &TrainConfig::lr),
      field("epochs", &TrainConfig::epochs),
      field("alpha", &TrainConfig::alpha),
      field("beta", &TrainConfig::beta),
      field("gamma", &TrainConfig::gamma),
      field("neighbor_count", &TrainConfig::neighbor_count),
      field("seed", &TrainConfig::seed),
      field("runs", &TrainConfig::runs),
      field("aggregation_sigmoid", &TrainConfig::aggregation_sigmoid),
      field("margin_literal", &TrainConfig::margin_literal),
      field("early_stop_patience", &TrainConfig::early_stop_patience),
      field("early_stop_tolerance", &TrainConfig::early_stop_tolerance),
      field("baseline_margin", &TrainConfig::baseline_margin),
      field("threads", &TrainConfig::threads),
  };
  return all;
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.emplace_back(f.key);
  return keys;
}

void TrainConfig::validate() const {
  if (dim < 2 || dim % 2 != 0) throw UsageError("dim must be even and >= 2");
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  if (!(lr > 0.0)) throw UsageError("lr must be positive");
  if (epochs < 0) throw UsageError("epochs must be >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw UsageError("alpha must lie in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw UsageError("beta must lie in [0, 1]");
  if (!(gamma >= 0.0)) throw UsageError("gamma must be >= 0");
  if (neighbor_count < 0) throw UsageError("neighbor_count must be >= 0 (0 = automatic)");
  if (runs < 1) throw UsageError("runs must be >= 1");
  if (early_stop_patience < 0) throw UsageError("early_stop_patience must be >= 0");
  if (!(early_stop_tolerance >= 0.0)) throw UsageError("early_stop_tolerance must be >= 0");
  if (!(baseline_margin >= 0.0)) throw UsageError("baseline_margin must be >= 0");
  if (threads < 1) throw UsageError("threads must be >= 1");
}

void TrainConfig::set(const std::string& key, const std::string& value) {
  for (const Field& f : fields()) {
    if (key == f.key) {
      f.set(*this, value);
      return;
    }
  }
  std::string valid;
  for (const Field& f : fields()) valid += std::string(valid.empty() ? "" : ", ") + f.key;
  throw UsageError("unknown config key '" + key + "'; valid keys: " + valid);
}

std::string TrainConfig::to_text() const {
  std::string out;
  for (const Field& f : fields()) out += std::string(f.key) + " = " + f.get(*this) + "\n";
  return out;
}

TrainConfig parse_config(std::istream& in, TrainConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty() || value.empty()) throw ParseError("expected 'key = value'", line_no);
    base.set(key, value);
  }
  return base;
}

TrainConfig load_config(const std::filesystem::path& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  try {
    return parse_config(in, std::move(base));
  } catch (const ParseError& e) {
    throw e.in_file(path.string());
  }
}

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("KGAD_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  const std::string text(raw);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("KGAD_SEED must be a non-negative integer, got '" + text + "'");
  }
  return v;
}

TrainConfig default_config() {
  TrainConfig c;
  if (auto s = env_seed()) c.seed = *s;
  return c;
}

}  // namespace kgad
