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

#include <Eigen/Dense>

#include "eegmc/feature_store.hpp"
#include "eegmc/harness.hpp"
#include "eegmc/nn.hpp"
#include "eegmc/pipeline.hpp"

namespace eegmc::analysis {

/// Per-window design matrix: one row per (item, step) of the store in
/// item-major order, one column per feature; y holds 0 (left) / 1 (right).
struct FeatureMatrix {
  Eigen::MatrixXd x;
  std::vector<int> y;
};

FeatureMatrix feature_matrix(const features::FeatureStore& store);

/// Ranking-forest settings. mtry == 0 picks the nearest integer to the
/// square root of the feature count.
struct RfConfig {
  int n_trees = 100;
  int max_depth = 8;
  int mtry = 0;
  std::uint64_t seed = 0;
  int jobs = 1;
};

void validate(const RfConfig& cfg);

/// Gini impurity-decrease importance from an ensemble of depth-limited
/// trees fit on bootstrap resamples, averaged over trees and normalized
/// to sum 1. Deterministic in (cfg.seed) regardless of cfg.jobs. Requires
/// at least 100 rows and both classes present.
std::vector<double> rf_importance(const Eigen::MatrixXd& x,
                                  std::span<const int> y,
                                  const RfConfig& cfg = {});

/// Two-sided Mann-Whitney U test per feature column using the normal
/// approximation with tie and continuity corrections. A feature with zero
/// rank variance (constant, or all values tied) gets p = 1. Requires at
/// least 20 rows per class.
std::vector<double> significance_test(const Eigen::MatrixXd& x,
                                      std::span<const int> y, int jobs = 1);

/// Importance scores joined with per-feature significance. `ranking` is a
/// permutation of feature ids ordered by importance descending (ties by
/// ascending id); `significant[i]` means p_values[i] < alpha / n_features.
struct ImportanceReport {
  std::vector<double> importance;
  std::vector<double> p_values;
  std::vector<int> ranking;
  std::vector<std::uint8_t> significant;
  double alpha = 0.05;
  double threshold = 0.0;
};

ImportanceReport make_report(std::vector<double> importance,
                             std::vector<double> p_values, double alpha = 0.05);

/// The k highest-importance features among those passing the Bonferroni
/// test, importance descending. When fewer than k pass, every passing
/// feature is returned and `short_of_k` is set.
struct TopFeatures {
  std::vector<int> indices;
  bool short_of_k = false;
};

TopFeatures top_k_features(const ImportanceReport& report, int k = 30);

/// Left electrode name of each montage pair in the frozen feature-index
/// order; feature i belongs to pair i / 11.
std::span<const char* const> pair_left_labels();

/// Display name of a montage pair, e.g. "Ft7-Ft8".
std::string pair_label(int pair);

/// Display name of a flat feature index, e.g. "Ft7-Ft8 skewness".
std::string feature_label(int feature);

/// Count of selected features per montage pair; rows cover all 27 pairs,
/// ordered by count descending then pair index. Counts sum to the size of
/// the selected set.
struct PairCount {
  int pair = 0;
  std::string label;
  int count = 0;
};

struct SensorRanking {
  std::vector<PairCount> rows;
};

SensorRanking sensor_ranking(std::span<const int> top_features);

/// CSV serialization, header "pair,count", one row per pair.
std::string sensor_ranking_csv(const SensorRanking& ranking);

/// Five-number summary with quartiles by linear interpolation between
/// order statistics.
struct Quartiles {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

Quartiles quartiles(std::vector<double> values);

/// Per-class five-number summaries of the k highest-ranked features.
struct QuartileRow {
  int feature = 0;
  std::string label;
  Quartiles left, right;
};

std::vector<QuartileRow> top_quartiles(const Eigen::MatrixXd& x,
                                       std::span<const int> y,
                                       std::span<const int> ranking, int k = 3);

/// Held-out accuracy of the per-fold models while the segment slides away
/// from the trial onset in steps of hop_seconds. Offsets are enumerated
/// from opt.offset_seconds and stop before the first offset at which some
/// fold has no evaluable trial left; trials too short for an offset are
/// excluded. At the base offset this reproduces the per-fold experiment
/// accuracies exactly.
struct TemporalCurve {
  std::vector<double> offsets;
  std::vector<harness::MeanSd> accuracy;
  std::vector<std::vector<double>> fold_accuracy;  // [offset][fold]
};

TemporalCurve temporal_accuracy(
    const std::vector<nn::Model>& fold_models, const harness::FoldPlan& plan,
    const std::vector<pipeline::Prepared>& recordings,
    const pipeline::FeaturizeOptions& opt, double hop_seconds = 0.25,
    double threshold = 0.5, int jobs = 1);

/// Writes importance.json, top_features.json, sensor_ranking.csv and
/// quartiles.json under dir. Output bytes depend only on the arguments.
void write_analysis_outputs(const std::string& dir,
                            const ImportanceReport& report,
                            const TopFeatures& top,
                            const SensorRanking& ranking,
                            const std::vector<QuartileRow>& quartile_rows);

/// Writes "offset,accuracy_mean,accuracy_sd" rows.
void write_temporal_csv(const std::string& path, const TemporalCurve& curve);

}  // namespace eegmc::analysis
