// Copyright 2026 The FaceMap Authors.
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

#ifndef FACEMAP_RNG_HPP_
#define FACEMAP_RNG_HPP_

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace facemap {

/// SplitMix64 step. Used to expand a single seed into generator state and to
/// derive independent per-restart seeds.
std::uint64_t SplitMix64(std::uint64_t& state);

/// xoshiro256** with SplitMix64 seeding.
///
/// Every draw used by the library (integers, uniforms, normals, shuffles) is
/// derived here with fixed arithmetic, so a given seed yields identical
/// streams on every platform. The std:: distributions are deliberately not
/// used: their algorithms are implementation-defined.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double Uniform();

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t Below(std::uint64_t bound);

  /// Standard normal via Box-Muller; caches the second variate.
  double Normal();

  /// Fisher-Yates shuffle.
  template <typename T>
  void Shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(Below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace facemap

#endif  // FACEMAP_RNG_HPP_
