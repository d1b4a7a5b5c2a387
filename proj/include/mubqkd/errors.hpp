// Copyright 2026 The mubqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mubqkd {

/// Bad input: malformed files, out-of-range parameters, inconsistent shapes.
/// The command line maps these to exit status 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed on valid input. Exit status 2.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnsupportedDimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Argument outside the admissible domain of a closed-form rate.
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Count data violating an invariant (negative, coincidences above singles,
/// duplicate or missing setting pairs).
class CountsError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Efficiency estimate with a zero denominator.
class DivisionError : public CountsError {
 public:
  using CountsError::CountsError;
};

/// Efficiency estimate above one.
class InconsistentCountsError : public CountsError {
 public:
  using CountsError::CountsError;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : ValidationError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A built-in construction produced a set that fails its own invariant.
class ConstructionError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace mubqkd
