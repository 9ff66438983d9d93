// Copyright 2026 The domaingap Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace domaingap {

// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text or binary input. `line` and `field` are 1-based; 0 means
// "not applicable".
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0,
             std::size_t field = 0)
      : Error(format(what, line, field)), line_(line), field_(field) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t field() const noexcept { return field_; }

 private:
  static std::string format(const std::string& what, std::size_t line,
                            std::size_t field) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (field > 0) out += "field " + std::to_string(field) + ": ";
    return out + what;
  }

  std::size_t line_;
  std::size_t field_;
};

// A value violates a documented precondition or invariant.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace domaingap
