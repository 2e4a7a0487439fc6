// Copyright 2026 The rigba Authors.
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

namespace rigba {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// Observed point is behind or on the camera plane.
class CheiralityViolation : public Error {
 public:
  CheiralityViolation() : Error("point fails cheirality (depth <= epsilon)") {}
  explicit CheiralityViolation(const std::string& message) : Error(message) {}
};

// A generated scene leaves some frame with too few landmarks to constrain it.
class DegenerateScene : public Error {
 public:
  explicit DegenerateScene(const std::string& message) : Error(message) {}
};

// Point configuration unusable for alignment (collinear or coincident).
class DegenerateConfiguration : public Error {
 public:
  explicit DegenerateConfiguration(const std::string& message)
      : Error(message) {}
};

// Normal-equations solve failed even after damping escalation.
class NumericalFailure : public Error {
 public:
  explicit NumericalFailure(const std::string& message) : Error(message) {}
};

// Caller violated a documented precondition.
class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& message) : Error(message) {}
};

// Bad experiment configuration (unknown key, unreadable file, bad value).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error(message) {}
};

// Malformed problem file. Carries the offending line and record kind.
class ParseError : public Error {
 public:
  ParseError(int line_number, std::string record_kind, const std::string& message)
      : Error("parse error at line " + std::to_string(line_number) + " (" +
              (record_kind.empty() ? "unknown" : record_kind) + "): " + message),
        line_number_(line_number),
        record_kind_(std::move(record_kind)) {}

  int line_number() const { return line_number_; }
  const std::string& record_kind() const { return record_kind_; }

 private:
  int line_number_;
  std::string record_kind_;
};

}  // namespace rigba
