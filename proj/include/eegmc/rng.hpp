// Copyright 2026 The eegmc Authors
// SPDX-License-Identifier: Apache-2.0
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

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace eegmc {

/// Deterministic random stream built on std::mt19937_64 (whose output is
/// fully specified by the standard) with hand-rolled distributions so the
/// same seed gives the same draws on every platform.
///
/// All randomness in the project fans out from one base seed through
/// named substreams: `Rng::stream(seed, "dropout", epoch, step)` style.
/// Substream seeds are derived by hashing the base seed with the stream
/// tag and indices, so streams are independent and reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Derive the seed of a named substream from a base seed.
  static std::uint64_t derive(std::uint64_t seed, std::string_view tag,
                              std::uint64_t a = 0, std::uint64_t b = 0);

  /// Construct the named substream directly.
  static Rng stream(std::uint64_t seed, std::string_view tag,
                    std::uint64_t a = 0, std::uint64_t b = 0) {
    return Rng(derive(seed, tag, a, b));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller (deterministic, caches the second draw).
  double gaussian();

  /// Fisher-Yates shuffle.
  template <typename Seq>
  void shuffle(Seq& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace eegmc
