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

// Counter-based random numbers.
//
// Every value is a pure function of (seed, index): the 64-bit seed is hashed
// into a key with the SplitMix64 finalizer, and element i draws its bits from
// mix64(key + (i + 1) * 0x9E3779B97F4A7C15). Normals use the Box-Muller pair
// (cos for even indices, sin for odd ones) built from uniforms of indices 2k
// and 2k + 1. Any slice of a vector can therefore be regenerated on its own,
// which is what lets perturbations live as a seed instead of a stored vector.
// Bits are identical on every platform whose libm returns the same log, cos
// and sin values (glibc does).

#ifndef GRADBENCH_RANDOM_H_
#define GRADBENCH_RANDOM_H_

#include <cstddef>
#include <cstdint>
#include <span>

namespace gradbench {

std::uint64_t mix64(std::uint64_t x);

// Hash-combines a base seed with up to three stream coordinates.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0);

// Uniform in [0, 1) with 53 random bits.
double uniform_at(std::uint64_t seed, std::uint64_t index);

// Standard normal.
double normal_at(std::uint64_t seed, std::uint64_t index);

// out[j] = stddev * normal_at(seed, offset + j).
void fill_normal(std::uint64_t seed, std::size_t offset, std::span<double> out,
                 double stddev = 1.0);

// out[j] = lo + (hi - lo) * uniform_at(seed, offset + j).
void fill_uniform(std::uint64_t seed, std::size_t offset, std::span<double> out,
                  double lo, double hi);

}  // namespace gradbench

#endif  // GRADBENCH_RANDOM_H_
