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

#include <gtest/gtest.h>

#include <set>

#include "gradbench/errors.h"
#include "gradbench/verify.h"
#include "json.hpp"

namespace gradbench {
namespace {

TEST(Verify, AccountingSuitePasses) {
  const auto entries = run_verify("accounting", {});
  ASSERT_FALSE(entries.empty());
  for (const auto& e : entries) EXPECT_TRUE(e.pass) << e.property << " " << e.measured;
}

TEST(Verify, LemmaSuitePasses) {
  const auto entries = run_verify("lemmas", {});
  ASSERT_FALSE(entries.empty());
  for (const auto& e : entries) EXPECT_TRUE(e.pass) << e.property << " " << e.measured;
}

TEST(Verify, TheoremSuitePasses) {
  const auto entries = run_verify("theorems", {});
  ASSERT_FALSE(entries.empty());
  for (const auto& e : entries) EXPECT_TRUE(e.pass) << e.property << " " << e.measured;
}

TEST(Verify, ZeroToleranceFailsStochasticChecks) {
  VerifyOptions opts;
  opts.tolerance_scale = 0.0;
  const auto entries = run_verify("lemmas", opts);
  std::size_t failed = 0;
  for (const auto& e : entries) failed += !e.pass;
  EXPECT_GE(failed, 1u);
}

TEST(Verify, EveryModuleIsCovered) {
  std::set<std::string> modules;
  for (const auto& e : run_verify("accounting", {})) {
    modules.insert(e.property.substr(0, e.property.find('.')));
  }
  for (const char* m : {"tensor", "nn", "reverse_ad", "forward_ad", "zero_order", "variants",
                        "optim"}) {
    EXPECT_TRUE(modules.count(m)) << m;
  }
}

TEST(Verify, UnknownSuiteThrows) {
  EXPECT_THROW(run_verify("everything", {}), ConfigError);
}

TEST(Verify, ReportSchema) {
  std::vector<VerifyEntry> entries = {{"lemmas", "a.b", 1.0, 1.0, 0.1, true},
                                      {"lemmas", "a.c", 2.0, 1.0, 0.1, false}};
  const auto doc = nlohmann::json::parse(verify_report_json(entries));
  EXPECT_EQ(doc["passed"], 1);
  EXPECT_EQ(doc["failed"], 1);
  ASSERT_EQ(doc["entries"].size(), 2u);
  for (const char* key : {"suite", "property", "measured", "predicted", "tolerance", "pass"}) {
    EXPECT_TRUE(doc["entries"][0].contains(key)) << key;
  }
}

}  // namespace
}  // namespace gradbench
