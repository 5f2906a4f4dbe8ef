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

#include <cmath>
#include <vector>

#include "gradbench/random.h"

namespace gradbench {
namespace {

TEST(Random, CounterBasedAndDeterministic) {
  EXPECT_EQ(normal_at(7, 123), normal_at(7, 123));
  EXPECT_NE(normal_at(7, 123), normal_at(8, 123));
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 2));
}

TEST(Random, FillWithOffsetMatchesWholeStream) {
  std::vector<double> whole(50);
  fill_normal(11, 0, whole);
  std::vector<double> tail(20);
  fill_normal(11, 30, tail);
  for (std::size_t i = 0; i < tail.size(); ++i) EXPECT_EQ(tail[i], whole[30 + i]);
}

TEST(Random, UniformInRange) {
  std::vector<double> u(10000);
  fill_uniform(3, 0, u, -2.0, 0.5);
  for (double x : u) {
    EXPECT_GE(x, -2.0);
    EXPECT_LE(x, 0.5);
  }
}

TEST(Random, NormalMoments) {
  std::vector<double> v(200000);
  fill_normal(42, 0, v, 2.0);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size() - 1);
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(var, 4.0, 0.08);
}

}  // namespace
}  // namespace gradbench
