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

#include <atomic>
#include <iostream>
#include <mutex>
#include <string_view>

namespace kgad {

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

inline std::atomic<LogLevel>& log_level() {
  static std::atomic<LogLevel> level{LogLevel::kInfo};
  return level;
}

inline void log_at(LogLevel level, std::string_view msg) {
  if (static_cast<int>(level) > static_cast<int>(log_level().load())) return;
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::clog << "[kgad] " << msg << '\n';
}

inline void log_info(std::string_view msg) { log_at(LogLevel::kInfo, msg); }
inline void log_debug(std::string_view msg) { log_at(LogLevel::kDebug, msg); }

}  // namespace kgad
