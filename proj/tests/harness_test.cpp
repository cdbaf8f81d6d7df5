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

#include "eegmc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "eegmc/log.hpp"
#include "eegmc/rng.hpp"

namespace harness = eegmc::harness;
namespace features = eegmc::features;
namespace nn = eegmc::nn;
using eegmc::Rng;
using eegmc::edf::Side;

namespace {

const bool quiet_logs = [] {
  eegmc::logln::set_level(eegmc::logln::Level::warn);
  return true;
}();

using Preds = std::vector<std::pair<double, double>>;

// Pairwise ranking probability with ties counted half; deliberately
// quadratic and independent of the ROC sweep.
double mw_auc(const Preds& preds) {
  double u = 0.0;
  std::int64_t n_pos = 0, n_neg = 0;
  for (const auto& [sp, yp] : preds) {
    if (yp < 0.5) {
      ++n_neg;
      continue;
    }
    ++n_pos;
    for (const auto& [sn, yn] : preds) {
      if (yn >= 0.5) continue;
      if (sp > sn) {
        u += 1.0;
      } else if (sp == sn) {
        u += 0.5;
      }
    }
  }
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Store with a single informative feature: feature 0 carries the label
// sign scaled by `effect` on every step; the rest is unit noise.
features::FeatureStore planted_store(int n_subjects, int trials_per_subject,
                                     int n_features, double effect,
                                     std::uint64_t seed) {
  features::FeatureStore store;
  Rng rng(seed);
  for (int s = 0; s < n_subjects; ++s) {
    for (int t = 0; t < trials_per_subject; ++t) {
      features::FeatureTensor tensor;
      tensor.subject = s + 1;
      tensor.trial = t;
      tensor.label = t % 2 == 0 ? Side::Left : Side::Right;
      const double sign = tensor.label == Side::Right ? 1.0 : -1.0;
      tensor.steps.resize(features::kTimeFeatures);
      for (auto& step : tensor.steps) {
        step.resize(static_cast<std::size_t>(n_features));
        for (auto& v : step) v = rng.gaussian();
        step[0] += sign * effect;
      }
      store.add(tensor);
    }
  }
  return store;
}

harness::TrainSpec tiny_spec(int n_features) {
  harness::TrainSpec spec;
  spec.model.input_dim = n_features;
  spec.model.hidden = 8;
  spec.model.depth = 1;
  spec.model.dropout = {0.0, 0.0, 0.0, 0.0};
  spec.model.l2 = 0.0;
  spec.model.lr = 0.01;
  spec.batch_size = 16;
  spec.epochs = 8;
  return spec;
}

std::vector<const features::FeatureTensor*> pointers(
    const std::vector<features::FeatureTensor>& v) {
  std::vector<const features::FeatureTensor*> out;
  out.reserve(v.size());
  for (const auto& t : v) out.push_back(&t);
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_dir(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("make_folds deals shuffled units into near-equal groups") {
  std::vector<int> units(103);
  for (int i = 0; i < 103; ++i) units[i] = i + 1;

  const auto plan = harness::make_folds(units, harness::Scheme::Cross, 7);
  REQUIRE(plan.test_units.size() == 10);
  CHECK(plan.seed == 7);

  std::multiset<std::size_t> sizes;
  std::set<int> seen;
  for (const auto& fold : plan.test_units) {
    sizes.insert(fold.size());
    for (const int u : fold) {
      CHECK(seen.insert(u).second);  // disjoint
    }
  }
  CHECK(seen.size() == 103);  // partition
  CHECK(sizes == std::multiset<std::size_t>{11, 11, 11, 10, 10, 10, 10, 10,
                                            10, 10});
  // Larger groups come first.
  CHECK(plan.test_units[0].size() == 11);
  CHECK(plan.test_units[2].size() == 11);
  CHECK(plan.test_units[3].size() == 10);
}

TEST_CASE("make_folds is seed-deterministic and seed-sensitive") {
  std::vector<int> units(40);
  for (int i = 0; i < 40; ++i) units[i] = i;
  const auto a = harness::make_folds(units, harness::Scheme::Cross, 11);
  const auto b = harness::make_folds(units, harness::Scheme::Cross, 11);
  const auto c = harness::make_folds(units, harness::Scheme::Cross, 12);
  CHECK(a.test_units == b.test_units);
  CHECK(a.test_units != c.test_units);
}

TEST_CASE("make_folds stays a valid partition across many seeds") {
  std::vector<int> units(103);
  for (int i = 0; i < 103; ++i) units[i] = i + 1;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto plan = harness::make_folds(units, harness::Scheme::Cross, seed);
    std::set<int> seen;
    for (const auto& fold : plan.test_units) {
      CHECK((fold.size() == 10 || fold.size() == 11));
      for (const int u : fold) seen.insert(u);
    }
    CHECK(seen.size() == 103);
  }
}

TEST_CASE("make_folds handles uneven counts and rejects bad input") {
  std::vector<int> seven{1, 2, 3, 4, 5, 6, 7};
  const auto plan = harness::make_folds(seven, harness::Scheme::Intra, 1, 3);
  REQUIRE(plan.test_units.size() == 3);
  CHECK(plan.test_units[0].size() == 3);
  CHECK(plan.test_units[1].size() == 2);
  CHECK(plan.test_units[2].size() == 2);

  std::vector<int> nine(9, 0);
  for (int i = 0; i < 9; ++i) nine[static_cast<std::size_t>(i)] = i;
  CHECK_THROWS_AS(harness::make_folds(nine, harness::Scheme::Cross, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(harness::make_folds(seven, harness::Scheme::Cross, 0, 1),
                  std::invalid_argument);
}

TEST_CASE("evaluate reproduces the hand confusion matrix") {
  Preds preds;
  for (int i = 0; i < 4; ++i) preds.emplace_back(0.9, 1.0);  // tp
  preds.emplace_back(0.8, 0.0);                              // fp
  for (int i = 0; i < 2; ++i) preds.emplace_back(0.2, 1.0);  // fn
  for (int i = 0; i < 3; ++i) preds.emplace_back(0.1, 0.0);  // tn

  const auto m = harness::evaluate(preds);
  CHECK(m.tp == 4);
  CHECK(m.fp == 1);
  CHECK(m.fn == 2);
  CHECK(m.tn == 3);
  CHECK(m.precision == 0.8);
  CHECK(m.recall == 2.0 / 3.0);
  CHECK(m.accuracy == 0.7);
  CHECK_FALSE(m.degenerate_precision);
  CHECK_FALSE(m.degenerate_recall);
  CHECK_FALSE(m.degenerate_accuracy);
}

TEST_CASE("evaluate flags degenerate denominators and counts p == threshold "
          "as positive") {
  Preds all_negative{{0.1, 1.0}, {0.2, 0.0}};
  const auto m1 = harness::evaluate(all_negative);
  CHECK(m1.degenerate_precision);
  CHECK(m1.precision == 0.0);
  CHECK_FALSE(m1.degenerate_recall);

  Preds no_positives{{0.9, 0.0}, {0.1, 0.0}};
  const auto m2 = harness::evaluate(no_positives);
  CHECK(m2.degenerate_recall);
  CHECK(m2.recall == 0.0);

  Preds boundary{{0.5, 1.0}};
  const auto m3 = harness::evaluate(boundary);
  CHECK(m3.tp == 1);

  CHECK_THROWS_AS(harness::evaluate(Preds{}), std::invalid_argument);
}

TEST_CASE("roc_auc equals the pairwise ranking oracle") {
  Rng rng(Rng::derive(11, "roc-oracle"));
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(49);
    Preds preds;
    preds.reserve(n);
    // Half the trials draw from a coarse grid so tied scores are common.
    const bool discrete = trial % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double score =
          discrete ? static_cast<double>(rng.below(5)) / 4.0 : rng.uniform();
      preds.emplace_back(score, i % 2 == 0 ? 1.0 : 0.0);
    }
    const auto roc = harness::roc_auc(preds);
    CHECK(std::abs(roc.auc - mw_auc(preds)) < 1e-12);
  }
}

TEST_CASE("roc_auc anchors and curve shape") {
  Preds separable{{0.9, 1.0}, {0.8, 1.0}, {0.2, 0.0}, {0.1, 0.0}};
  CHECK(harness::roc_auc(separable).auc == 1.0);

  Preds reversed{{0.1, 1.0}, {0.9, 0.0}};
  CHECK(harness::roc_auc(reversed).auc == 0.0);

  Preds tied{{0.5, 1.0}, {0.5, 0.0}, {0.5, 1.0}, {0.5, 0.0}};
  CHECK(harness::roc_auc(tied).auc == 0.5);

  const auto roc = harness::roc_auc(separable);
  REQUIRE(roc.fpr.size() == roc.tpr.size());
  CHECK(roc.fpr.front() == 0.0);
  CHECK(roc.tpr.front() == 0.0);
  CHECK(roc.fpr.back() == 1.0);
  CHECK(roc.tpr.back() == 1.0);
  for (std::size_t i = 1; i < roc.fpr.size(); ++i) {
    CHECK(roc.fpr[i] >= roc.fpr[i - 1]);
    CHECK(roc.tpr[i] >= roc.tpr[i - 1]);
  }

  Preds one_class{{0.9, 1.0}, {0.1, 1.0}};
  CHECK_THROWS_AS(harness::roc_auc(one_class), std::invalid_argument);
}

TEST_CASE("mean_sd uses the sample standard deviation") {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const auto ms = harness::mean_sd(xs);
  CHECK(ms.mean == 2.5);
  CHECK(ms.sd == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-12));

  const std::vector<double> one{7.0};
  CHECK(harness::mean_sd(one).mean == 7.0);
  CHECK(harness::mean_sd(one).sd == 0.0);
  CHECK(harness::mean_sd({}).mean == 0.0);
}

TEST_CASE("train_model learns the planted feature reproducibly") {
  const int n_features = 6;
  auto store = planted_store(1, 48, n_features, 1.5, 21);
  std::vector<features::FeatureTensor> tensors;
  for (std::size_t i = 0; i < store.size(); ++i) {
    tensors.push_back(store.tensor(i));
  }
  const auto items = pointers(tensors);
  auto spec = tiny_spec(n_features);
  spec.model.dropout = {0.1, 0.1, 0.0, 0.0};  // exercise the dropout stream

  std::vector<double> losses;
  const auto model = harness::train_model(items, spec, 5, 0, 0, &losses);
  REQUIRE(losses.size() == static_cast<std::size_t>(spec.epochs));
  CHECK(losses.back() < losses.front());

  const auto preds = harness::predict_all(model, items);
  const auto m = harness::evaluate(preds);
  CHECK(m.accuracy > 0.9);

  // Same stream, same bits; a different fold tag moves the stream.
  const auto again = harness::train_model(items, spec, 5, 0, 0);
  const auto preds_again = harness::predict_all(again, items);
  CHECK(preds == preds_again);
  const auto other = harness::train_model(items, spec, 5, 1, 0);
  const auto preds_other = harness::predict_all(other, items);
  CHECK(preds != preds_other);
}

TEST_CASE("run_experiment cross scheme separates subjects and repeats "
          "byte-identically") {
  const int n_features = 6;
  const auto store = planted_store(10, 6, n_features, 2.0, 33);

  harness::ExperimentConfig cfg = harness::make_config(harness::Scheme::Cross, 9);
  cfg.train = tiny_spec(n_features);
  const auto dir_a = temp_dir("eegmc_harness_a");
  cfg.out_dir = dir_a.string();

  const auto result = harness::run_experiment(store, cfg);
  REQUIRE(result.folds.size() == 10);

  std::set<int> tested;
  for (const auto& fold : result.folds) {
    REQUIRE(fold.test_units.size() == 1);
    CHECK(tested.insert(fold.test_units[0]).second);
    CHECK(fold.predictions.size() == 6);
    // Every prediction belongs to the held-out subject's trials only:
    // train/test subject sets are disjoint by construction of the plan.
  }
  CHECK(tested.size() == 10);
  CHECK(result.aggregate.accuracy.mean > 0.9);
  CHECK(result.aggregate.pooled_auc > 0.95);
  CHECK(result.roc.auc == result.aggregate.pooled_auc);

  for (int f = 0; f < 10; ++f) {
    char name[32];
    std::snprintf(name, sizeof(name), "fold_%02d.alsm", f);
    const auto path = dir_a / "models" / name;
    REQUIRE(std::filesystem::exists(path));
    const auto ckpt = nn::load_checkpoint(path.string());
    CHECK(ckpt.model.config.hidden == cfg.train.model.hidden);
  }

  // Re-run with a fresh out dir, then again with 4 worker threads; the
  // metrics bytes must not move.
  const auto dir_b = temp_dir("eegmc_harness_b");
  cfg.out_dir = dir_b.string();
  harness::run_experiment(store, cfg);
  CHECK(slurp(dir_a / "metrics.json") == slurp(dir_b / "metrics.json"));
  CHECK(slurp(dir_a / "roc.csv") == slurp(dir_b / "roc.csv"));
  CHECK(slurp(dir_a / "plan.json") == slurp(dir_b / "plan.json"));

  const auto dir_c = temp_dir("eegmc_harness_c");
  cfg.out_dir = dir_c.string();
  cfg.jobs = 4;
  harness::run_experiment(store, cfg);
  CHECK(slurp(dir_a / "metrics.json") == slurp(dir_c / "metrics.json"));

  // A different seed reshuffles the plan.
  harness::ExperimentConfig other = cfg;
  other.seed = 10;
  other.out_dir.clear();
  other.save_models = false;
  const auto moved = harness::run_experiment(store, other);
  CHECK(moved.plan.test_units != result.plan.test_units);

  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
  std::filesystem::remove_all(dir_c);
}

TEST_CASE("run_experiment intra scheme aggregates per subject") {
  const int n_features = 6;
  const auto store = planted_store(2, 20, n_features, 2.0, 51);

  harness::ExperimentConfig cfg = harness::make_config(harness::Scheme::Intra, 3);
  cfg.train = tiny_spec(n_features);
  cfg.train.batch_size = 4;
  cfg.train.epochs = 4;
  cfg.save_models = false;

  const auto result = harness::run_experiment(store, cfg);
  REQUIRE(result.folds.size() == 20);  // 2 subjects x 10 folds
  REQUIRE(result.subject_accuracy.size() == 2);
  for (const auto& fold : result.folds) {
    CHECK(fold.subject >= 1);
    CHECK(fold.predictions.size() == 2);
  }
  // The aggregate averages the per-subject pooled accuracies.
  const double by_hand = (result.subject_accuracy[0].second +
                          result.subject_accuracy[1].second) /
                         2.0;
  CHECK(result.aggregate.accuracy.mean == doctest::Approx(by_hand).epsilon(1e-12));
  CHECK(result.aggregate.accuracy.mean > 0.8);

  const auto rerun = harness::run_experiment(store, cfg);
  CHECK(rerun.aggregate.accuracy.mean == result.aggregate.accuracy.mean);
  CHECK(rerun.aggregate.pooled.tp == result.aggregate.pooled.tp);
}

TEST_CASE("run_experiment rejects mismatched model dims") {
  const auto store = planted_store(10, 2, 6, 1.0, 1);
  harness::ExperimentConfig cfg = harness::make_config(harness::Scheme::Cross, 1);
  cfg.train = tiny_spec(5);  // wrong input_dim
  CHECK_THROWS_AS(harness::run_experiment(store, cfg), std::invalid_argument);
}

TEST_CASE("baseline_logreg separates the planted store") {
  const int n_features = 6;
  const auto store = planted_store(10, 6, n_features, 2.0, 77);
  harness::ExperimentConfig cfg = harness::make_config(harness::Scheme::Cross, 2);
  cfg.train = tiny_spec(n_features);

  const auto result = harness::baseline_logreg(store, cfg);
  REQUIRE(result.folds.size() == 10);
  CHECK(result.aggregate.accuracy.mean > 0.9);

  // Zero iterations keep w = 0, so every score is exactly 0.5 and the
  // accuracy collapses to the class balance.
  harness::BaselineSpec idle;
  idle.iterations = 0;
  const auto chance = harness::baseline_logreg(store, cfg, idle);
  for (const auto& fold : chance.folds) {
    for (const auto& [p, y] : fold.predictions) CHECK(p == 0.5);
  }
  CHECK(chance.aggregate.accuracy.mean > 0.3);
  CHECK(chance.aggregate.accuracy.mean < 0.7);

  const auto again = harness::baseline_logreg(store, cfg);
  CHECK(again.aggregate.accuracy.mean == result.aggregate.accuracy.mean);
}

TEST_CASE("segment_size_sweep reports one row per size in order") {
  const std::vector<double> sizes{0.5, 1.0, 2.0};
  std::vector<double> seen;
  const auto rows = harness::segment_size_sweep(
      sizes, [&](double size) {
        seen.push_back(size);
        harness::ExperimentResult r;
        r.aggregate.accuracy.mean = size * 10.0;
        r.aggregate.accuracy.sd = 0.25;
        return r;
      });
  CHECK(seen == sizes);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].segment_len == 0.5);
  CHECK(rows[1].accuracy.mean == 10.0);
  CHECK(rows[2].accuracy.sd == 0.25);
}
