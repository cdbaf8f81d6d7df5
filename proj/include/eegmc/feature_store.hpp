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
#include <span>
#include <string>
#include <vector>

#include "eegmc/features.hpp"

namespace eegmc::features {

/// Identity of one stored feature tensor.
struct StoreItem {
  int subject = 0;
  int trial = 0;
  edf::Side label = edf::Side::Left;
  double offset_seconds = 0.0;
};

/// In-memory feature store: a flat items x steps x features block of
/// 32-bit floats plus per-item identity. The on-disk format is the magic
/// `EEGF`, a little-endian u32 version, a u32-length-prefixed JSON header
/// and the row-major little-endian float payload; writes are byte-stable
/// for identical inputs.
struct FeatureStore {
  std::int32_t n_steps = 0;
  std::int32_t n_features = 0;
  std::vector<StoreItem> items;
  std::vector<float> data;

  std::size_t size() const { return items.size(); }

  /// Appends one tensor, fixing dims on first use and validating after.
  void add(const FeatureTensor& t);

  /// Row block of item i: n_steps*n_features floats.
  std::span<const float> rows(std::size_t i) const;

  /// Rebuilds a tensor (float precision) for item i.
  FeatureTensor tensor(std::size_t i) const;
};

void write_feature_store(const std::string& path, const FeatureStore& store);

FeatureStore read_feature_store(const std::string& path);

}  // namespace eegmc::features
