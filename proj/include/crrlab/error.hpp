// Copyright 2026 The crrlab Authors.
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

namespace crrlab {

/// Base of every error the library raises. The CLI maps the concrete
/// subclass onto a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or violated precondition on an argument (exit 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (exit 3).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A JSONL line that could not be parsed. Carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A well-formed record that breaks a dataset invariant.
class ValidationError : public DataError {
 public:
  ValidationError(std::string id, const std::string& what)
      : DataError(id + ": " + what), id_(std::move(id)) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

/// NaN/Inf encountered in parameters or losses (exit 4).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace crrlab
