// Copyright 2026 The gradbench Authors.
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

#ifndef GRADBENCH_ERRORS_H_
#define GRADBENCH_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gradbench {

// Incompatible tensor or parameter shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A loss, tangent or gradient stopped being finite. This is the failure path
// perturbation-based training runs into, so it is reported, never clamped.
class OverflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration text or values. `line` is 0 when not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Step size outside the region where a convergence bound applies.
class ThresholdError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// SVRG snapshot older than its refresh period.
class StaleSnapshotError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace gradbench

#endif  // GRADBENCH_ERRORS_H_
