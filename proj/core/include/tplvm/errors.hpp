// Copyright 2026 The tplvm Authors.
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
#include <vector>

namespace tplvm {

/// Broad failure categories; the CLI maps each one onto an exit code.
enum class ErrorKind {
  Input,      // malformed arguments or shapes
  Domain,     // parameter outside its mathematical domain (e.g. nu <= 2)
  Numerical,  // factorization or optimization failure
  State,      // object used before it was initialised
  Io,         // file missing, unreadable or malformed on disk
  Config,     // configuration rejected during validation
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::Input, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

class StateError : public Error {
 public:
  explicit StateError(const std::string& what) : Error(ErrorKind::State, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

/// Numerical failure. When raised by a jittered Cholesky the ladder of
/// diagonal offsets that was attempted is attached.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, std::vector<double> jitter_ladder = {})
      : Error(ErrorKind::Numerical, what), jitter_ladder_(std::move(jitter_ladder)) {}

  const std::vector<double>& jitter_ladder() const noexcept { return jitter_ladder_; }

 private:
  std::vector<double> jitter_ladder_;
};

/// Problem found while parsing a delimited panel file. `row` and `column`
/// are 1-based positions in the file (0 when not applicable).
class ParseError : public IoError {
 public:
  enum class Code { Empty, BadHeader, Ragged, BadNumber, BadDate, MissingCell, NonMonotoneDate, DuplicateDate, NonFinite, NonPositivePrice };

  ParseError(Code code, std::size_t row, std::size_t column, const std::string& what)
      : IoError(what), code_(code), row_(row), column_(column) {}

  Code code() const noexcept { return code_; }
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  Code code_;
  std::size_t row_;
  std::size_t column_;
};

}  // namespace tplvm
