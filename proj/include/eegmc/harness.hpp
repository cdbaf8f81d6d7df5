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
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eegmc/feature_store.hpp"
#include "eegmc/nn.hpp"

namespace eegmc::harness {

enum class Scheme { Cross, Intra };

const char* to_string(Scheme s);

/// Ten disjoint test groups. For the cross-subject scheme the units are
/// subject ids; for the intra-subject scheme they are one subject's
/// segment indices.
struct FoldPlan {
  Scheme scheme = Scheme::Cross;
  std::uint64_t seed = 0;
  std::vector<std::vector<int>> test_units;
};

/// Shuffles the units by seed and deals them into `n_folds` near-equal
/// groups (sizes differ by at most one, larger groups first). The groups
/// partition the input. Throws when there are fewer units than folds.
FoldPlan make_folds(std::vector<int> units, Scheme scheme, std::uint64_t seed,
                    int n_folds = 10);

/// Confusion counts plus the derived ratios. A ratio whose denominator is
/// empty is reported as 0 with its degenerate flag set.
struct Metrics {
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0, recall = 0.0, accuracy = 0.0;
  bool degenerate_precision = false;
  bool degenerate_recall = false;
  bool degenerate_accuracy = false;

  std::int64_t total() const { return tp + fp + fn + tn; }
};

/// Scores (p, y) pairs at a threshold; p >= threshold predicts the
/// positive class (right hand, label 1).
Metrics evaluate(std::span<const std::pair<double, double>> predictions,
                 double threshold = 0.5);

/// ROC by sweeping the unique scores from high to low, equal scores
/// grouped into one step; AUC by trapezoid. Equals the Mann-Whitney
/// statistic U/(n_pos*n_neg) with ties counted half. Throws when only one
/// class is present.
struct RocCurve {
  std::vector<double> fpr;  // from 0 to 1
  std::vector<double> tpr;
  double auc = 0.0;
};

RocCurve roc_auc(std::span<const std::pair<double, double>> predictions);

/// Training schedule on top of the model hyper-parameters.
struct TrainSpec {
  nn::ModelConfig model;
  int batch_size = 32;
  int epochs = 100;
};

/// Cross-subject defaults: dropout (0.0, 0.2, 0.1, 0.2), batch 32,
/// epochs 100.
TrainSpec cross_defaults();

/// Intra-subject defaults: dropout (0.7, 0.2, 0.1, 0.1), batch 2,
/// epochs 10.
TrainSpec intra_defaults();

/// Trains a fresh model on the given tensors. All randomness (init,
/// epoch shuffles, dropout) derives from (seed, tag_a, tag_b) so folds
/// are independent and reproducible. Optionally records per-epoch mean
/// training loss.
nn::Model train_model(const std::vector<const features::FeatureTensor*>& train,
                      const TrainSpec& spec, std::uint64_t seed,
                      std::uint64_t tag_a, std::uint64_t tag_b,
                      std::vector<double>* epoch_losses = nullptr);

/// Eval-mode predictions (p, y) for a list of tensors.
std::vector<std::pair<double, double>> predict_all(
    const nn::Model& m,
    const std::vector<const features::FeatureTensor*>& items);

struct ExperimentConfig {
  Scheme scheme = Scheme::Cross;
  TrainSpec train;  // set from {cross,intra}_defaults() by make_config
  features::SegmentSpec segment;  // provenance for the output header
  std::uint64_t seed = 0;
  double threshold = 0.5;
  int jobs = 1;
  std::string out_dir;      // empty: keep everything in memory
  bool save_models = true;  // write per-fold checkpoints (cross scheme)
};

/// Scheme-consistent config with Table-style defaults filled in.
ExperimentConfig make_config(Scheme scheme, std::uint64_t seed);

struct FoldResult {
  int fold = 0;
  int subject = -1;  // intra: owning subject
  std::vector<int> test_units;
  Metrics metrics;
  double auc = std::numeric_limits<double>::quiet_NaN();  // NaN: one class
  std::vector<std::pair<double, double>> predictions;
};

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n-1)
};

MeanSd mean_sd(std::span<const double> xs);

struct Aggregate {
  MeanSd accuracy, precision, recall;
  Metrics pooled;
  double pooled_auc = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentResult {
  Scheme scheme = Scheme::Cross;
  std::uint64_t seed = 0;
  FoldPlan plan;  // cross scheme; intra plans are per subject
  std::vector<FoldResult> folds;
  std::vector<std::pair<int, double>> subject_accuracy;  // intra only
  Aggregate aggregate;
  RocCurve roc;  // pooled over every test prediction
};

/// Runs the full 10-fold experiment for the configured scheme. Cross:
/// folds split subjects; intra: an independent 10-fold per subject,
/// aggregated as the mean over subjects. Folds run in parallel up to
/// cfg.jobs with per-fold rng streams; results are reduced in fold order
/// so the outcome is independent of scheduling.
ExperimentResult run_experiment(const features::FeatureStore& store,
                                const ExperimentConfig& cfg);

/// Writes metrics.json, roc.csv and plan.json under dir. Output bytes
/// depend only on the result, so reruns of the same experiment are
/// byte-identical.
void write_experiment_outputs(const ExperimentResult& result,
                              const std::string& dir);

/// L2-regularized logistic regression on the flattened 7x297 = 2079
/// vector, trained with plain full-batch gradient descent on per-fold
/// standardized features.
struct BaselineSpec {
  int iterations = 300;
  double lr = 0.5;
  double l2 = 1e-4;
};

ExperimentResult baseline_logreg(const features::FeatureStore& store,
                                 const ExperimentConfig& cfg,
                                 const BaselineSpec& spec = {});

struct SweepRow {
  double segment_len = 0.0;
  MeanSd accuracy;
};

/// Accuracy table produced by `sweep_fn(size)` for each requested size;
/// the callback rebuilds features at that size and runs the experiment.
/// Kept as a callback so callers control featurization inputs.
std::vector<SweepRow> segment_size_sweep(
    std::span<const double> sizes,
    const std::function<ExperimentResult(double)>& run_at_size);

}  // namespace eegmc::harness
