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

#include "gradbench/random.h"

#include <cmath>
#include <numbers>

namespace gradbench {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr double kTwoPow53 = 1.0 / 9007199254740992.0;

std::uint64_t bits_at(std::uint64_t key, std::uint64_t index) {
  return mix64(key + (index + 1) * kGolden);
}

struct NormalPair {
  double cos_value;
  double sin_value;
};

NormalPair normal_pair(std::uint64_t key, std::uint64_t pair) {
  // u1 in (0, 1] keeps the log finite; u2 in [0, 1).
  const double u1 =
      static_cast<double>((bits_at(key, 2 * pair) >> 11) + 1) * kTwoPow53;
  const double u2 =
      static_cast<double>(bits_at(key, 2 * pair + 1) >> 11) * kTwoPow53;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  std::uint64_t h = mix64(base + kGolden);
  h = mix64(h ^ (a + 0x632BE59BD9B4E019ULL));
  h = mix64(h ^ (b + 0x8CB92BA72F3D8DD7ULL));
  h = mix64(h ^ (c + 0xD6E8FEB86659FD93ULL));
  return h;
}

double uniform_at(std::uint64_t seed, std::uint64_t index) {
  return static_cast<double>(bits_at(mix64(seed), index) >> 11) * kTwoPow53;
}

double normal_at(std::uint64_t seed, std::uint64_t index) {
  const NormalPair p = normal_pair(mix64(seed), index / 2);
  return index % 2 == 0 ? p.cos_value : p.sin_value;
}

void fill_normal(std::uint64_t seed, std::size_t offset, std::span<double> out,
                 double stddev) {
  const std::uint64_t key = mix64(seed);
  std::size_t j = 0;
  while (j < out.size()) {
    const std::uint64_t index = offset + j;
    const NormalPair p = normal_pair(key, index / 2);
    if (index % 2 == 0) {
      out[j++] = stddev * p.cos_value;
      if (j < out.size()) out[j++] = stddev * p.sin_value;
    } else {
      out[j++] = stddev * p.sin_value;
    }
  }
}

void fill_uniform(std::uint64_t seed, std::size_t offset, std::span<double> out,
                  double lo, double hi) {
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = lo + (hi - lo) * uniform_at(seed, offset + j);
  }
}

}  // namespace gradbench
