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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgad {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number (0 when not line-specific).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}
  /// The same error located in `file`: "file:line: what".
  ParseError in_file(const std::string& file) const {
    ParseError e(*this);
    static_cast<Error&>(e) = Error(file + (line_ == 0 ? "" : ":" + std::to_string(line_)) + ": " + detail_);
    return e;
  }
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
  std::string detail_;
};

/// Operand shapes do not fit the operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A forward value or a loss became NaN or infinite.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Invalid user-supplied argument (bad ratio, unknown method, unknown config key...).
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace kgad
