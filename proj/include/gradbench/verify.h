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

// Self-checking property suites behind `gradbench verify`.
//
//   accounting  exact FLOP / memory laws and engine equivalences
//   lemmas      Monte Carlo bias, variance and second-moment checks
//   theorems    convergence bounds, step-size threshold, spikes, ordering
//
// Each entry reports a measured and a predicted value with the tolerance
// applied. Stochastic tolerances are multiplied by tolerance_scale.

#ifndef GRADBENCH_VERIFY_H_
#define GRADBENCH_VERIFY_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gradbench {

struct VerifyEntry {
  std::string suite;
  std::string property;
  double measured = 0.0;
  double predicted = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct VerifyOptions {
  double tolerance_scale = 1.0;
  std::uint64_t seed = 0;
};

// suite: accounting | lemmas | theorems | all.
std::vector<VerifyEntry> run_verify(std::string_view suite, const VerifyOptions& options);

std::string verify_report_json(const std::vector<VerifyEntry>& entries);

}  // namespace gradbench

#endif  // GRADBENCH_VERIFY_H_
