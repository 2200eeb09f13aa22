// Copyright 2026 The DPPF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Counter-based random numbers. Draw i of stream `seed` is a pure function
// of (seed, i), so results do not depend on the standard library's
// distribution implementations and any draw can be recomputed on demand.

#ifndef DPPF_RANDOM_HPP_
#define DPPF_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dppf {

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t CounterHash(std::uint64_t seed, std::uint64_t counter) {
  return SplitMix64(SplitMix64(seed) ^ (counter * 0xD1B54A32D192ED03ULL));
}

// Uniform on (0, 1].
inline double CounterUniform(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t bits = CounterHash(seed, counter) >> 11;
  return static_cast<double>(bits + 1) * 0x1.0p-53;
}

// Standard normal via Box-Muller on draws 2i and 2i+1.
inline double CounterGaussian(std::uint64_t seed, std::uint64_t index) {
  const double u1 = CounterUniform(seed, 2 * index);
  const double u2 = CounterUniform(seed, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Sequential wrapper for callers that just want the next value.
class CounterNormal {
 public:
  explicit CounterNormal(std::uint64_t seed, std::uint64_t offset = 0)
      : seed_(seed), next_(offset) {}

  double operator()() { return CounterGaussian(seed_, next_++); }
  double uniform() { return CounterUniform(seed_ ^ 0x5555555555555555ULL, next_++); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return next_; }

 private:
  std::uint64_t seed_;
  std::uint64_t next_;
};

}  // namespace dppf

#endif  // DPPF_RANDOM_HPP_
