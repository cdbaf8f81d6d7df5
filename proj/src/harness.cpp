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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "eegmc/log.hpp"
#include "eegmc/parallel.hpp"
#include "eegmc/rng.hpp"
#include "json.hpp"

namespace eegmc::harness {

namespace {

std::vector<const features::FeatureTensor*> collect(
    const features::FeatureStore& store, const std::vector<std::size_t>& idx,
    std::vector<features::FeatureTensor>& arena) {
  arena.clear();
  arena.reserve(idx.size());
  for (const std::size_t i : idx) arena.push_back(store.tensor(i));
  std::vector<const features::FeatureTensor*> out;
  out.reserve(arena.size());
  for (const auto& t : arena) out.push_back(&t);
  return out;
}

nlohmann::json metrics_to_json(const Metrics& m) {
  return {{"tp", m.tp},
          {"fp", m.fp},
          {"fn", m.fn},
          {"tn", m.tn},
          {"precision", m.precision},
          {"recall", m.recall},
          {"accuracy", m.accuracy},
          {"degenerate",
           {{"precision", m.degenerate_precision},
            {"recall", m.degenerate_recall},
            {"accuracy", m.degenerate_accuracy}}}};
}

nlohmann::json auc_to_json(double auc) {
  if (std::isnan(auc)) return nullptr;
  return auc;
}

}  // namespace

const char* to_string(Scheme s) {
  return s == Scheme::Cross ? "cross" : "intra";
}

FoldPlan make_folds(std::vector<int> units, Scheme scheme, std::uint64_t seed,
                    int n_folds) {
  if (n_folds < 2) {
    throw std::invalid_argument("make_folds: need at least 2 folds");
  }
  if (units.size() < static_cast<std::size_t>(n_folds)) {
    throw std::invalid_argument(
        "make_folds: fewer units (" + std::to_string(units.size()) +
        ") than folds (" + std::to_string(n_folds) + ")");
  }
  Rng rng = Rng::stream(seed, "folds");
  rng.shuffle(units);

  FoldPlan plan;
  plan.scheme = scheme;
  plan.seed = seed;
  plan.test_units.resize(static_cast<std::size_t>(n_folds));
  const std::size_t base = units.size() / static_cast<std::size_t>(n_folds);
  const std::size_t extra = units.size() % static_cast<std::size_t>(n_folds);
  std::size_t at = 0;
  for (std::size_t f = 0; f < static_cast<std::size_t>(n_folds); ++f) {
    const std::size_t take = base + (f < extra ? 1 : 0);
    plan.test_units[f].assign(units.begin() + static_cast<std::ptrdiff_t>(at),
                              units.begin() +
                                  static_cast<std::ptrdiff_t>(at + take));
    at += take;
  }
  return plan;
}

Metrics evaluate(std::span<const std::pair<double, double>> predictions,
                 double threshold) {
  if (predictions.empty()) {
    throw std::invalid_argument("evaluate: no predictions");
  }
  Metrics m;
  for (const auto& [p, y] : predictions) {
    const bool pos = p >= threshold;
    const bool truth = y >= 0.5;
    if (pos && truth) ++m.tp;
    if (pos && !truth) ++m.fp;
    if (!pos && truth) ++m.fn;
    if (!pos && !truth) ++m.tn;
  }
  if (m.tp + m.fp > 0) {
    m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
  } else {
    m.degenerate_precision = true;
  }
  if (m.tp + m.fn > 0) {
    m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  } else {
    m.degenerate_recall = true;
  }
  if (m.total() > 0) {
    m.accuracy =
        static_cast<double>(m.tp + m.tn) / static_cast<double>(m.total());
  } else {
    m.degenerate_accuracy = true;
  }
  return m;
}

RocCurve roc_auc(std::span<const std::pair<double, double>> predictions) {
  std::int64_t n_pos = 0, n_neg = 0;
  for (const auto& [p, y] : predictions) {
    (y >= 0.5 ? n_pos : n_neg) += 1;
  }
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("roc_auc: need both classes");
  }
  std::vector<std::pair<double, double>> sorted(predictions.begin(),
                                                predictions.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  RocCurve roc;
  roc.fpr.push_back(0.0);
  roc.tpr.push_back(0.0);
  std::int64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double score = sorted[i].first;
    // One ROC step per unique score: ties move diagonally together.
    while (i < sorted.size() && sorted[i].first == score) {
      (sorted[i].second >= 0.5 ? tp : fp) += 1;
      ++i;
    }
    roc.fpr.push_back(static_cast<double>(fp) / static_cast<double>(n_neg));
    roc.tpr.push_back(static_cast<double>(tp) / static_cast<double>(n_pos));
  }
  for (std::size_t k = 1; k < roc.fpr.size(); ++k) {
    roc.auc += (roc.fpr[k] - roc.fpr[k - 1]) * (roc.tpr[k] + roc.tpr[k - 1]) /
               2.0;
  }
  return roc;
}

TrainSpec cross_defaults() {
  TrainSpec s;
  s.model.dropout = {0.0, 0.2, 0.1, 0.2};
  s.batch_size = 32;
  s.epochs = 100;
  return s;
}

TrainSpec intra_defaults() {
  TrainSpec s;
  s.model.dropout = {0.7, 0.2, 0.1, 0.1};
  s.batch_size = 2;
  s.epochs = 10;
  return s;
}

ExperimentConfig make_config(Scheme scheme, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.scheme = scheme;
  cfg.train = scheme == Scheme::Cross ? cross_defaults() : intra_defaults();
  cfg.seed = seed;
  return cfg;
}

nn::Model train_model(const std::vector<const features::FeatureTensor*>& train,
                      const TrainSpec& spec, std::uint64_t seed,
                      std::uint64_t tag_a, std::uint64_t tag_b,
                      std::vector<double>* epoch_losses) {
  if (train.empty()) {
    throw std::invalid_argument("train_model: empty training set");
  }
  if (spec.batch_size < 1 || spec.epochs < 0) {
    throw std::invalid_argument("train_model: bad schedule");
  }
  Rng init = Rng::stream(Rng::derive(seed, "fold", tag_a, tag_b), "init");
  nn::Model model = nn::init_params(spec.model, init);
  nn::AdamState adam;

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const std::uint64_t fold_seed = Rng::derive(seed, "fold", tag_a, tag_b);
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    Rng shuffle_rng =
        Rng::stream(fold_seed, "shuffle", static_cast<std::uint64_t>(epoch));
    shuffle_rng.shuffle(order);
    Rng dropout_rng =
        Rng::stream(fold_seed, "dropout", static_cast<std::uint64_t>(epoch));

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t at = 0; at < order.size();
         at += static_cast<std::size_t>(spec.batch_size)) {
      const std::size_t end =
          std::min(order.size(), at + static_cast<std::size_t>(spec.batch_size));
      std::vector<const features::FeatureTensor*> items;
      items.reserve(end - at);
      for (std::size_t i = at; i < end; ++i) items.push_back(train[order[i]]);
      const nn::Batch batch = nn::batch_from_tensors(items);
      std::vector<nn::Mat> grads;
      const auto r = nn::forward_backward(model, batch, nn::Mode::Train,
                                          &dropout_rng, &grads);
      nn::adam_step(model, grads, adam);
      loss_sum += r.loss;
      ++batches;
    }
    if (epoch_losses != nullptr && batches > 0) {
      epoch_losses->push_back(loss_sum / static_cast<double>(batches));
    }
  }
  return model;
}

std::vector<std::pair<double, double>> predict_all(
    const nn::Model& m,
    const std::vector<const features::FeatureTensor*>& items) {
  if (items.empty()) return {};
  const nn::Batch batch = nn::batch_from_tensors(items);
  const auto r = nn::forward_backward(m, batch, nn::Mode::Eval, nullptr,
                                      nullptr);
  std::vector<std::pair<double, double>> out;
  out.reserve(items.size());
  for (Eigen::Index i = 0; i < batch.size(); ++i) {
    out.emplace_back(r.p(i), batch.labels(i));
  }
  return out;
}

MeanSd mean_sd(std::span<const double> xs) {
  MeanSd out;
  if (xs.empty()) return out;
  for (const double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (const double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return out;
}

double auc_or_nan(std::span<const std::pair<double, double>> preds) {
  bool pos = false, neg = false;
  for (const auto& [p, y] : preds) {
    (y >= 0.5 ? pos : neg) = true;
  }
  if (!pos || !neg) return std::numeric_limits<double>::quiet_NaN();
  return roc_auc(preds).auc;
}

Aggregate aggregate_folds(const std::vector<FoldResult>& folds,
                          const std::vector<std::pair<double, double>>& pooled,
                          double threshold) {
  Aggregate agg;
  std::vector<double> acc, prec, rec;
  for (const auto& f : folds) {
    acc.push_back(f.metrics.accuracy);
    prec.push_back(f.metrics.precision);
    rec.push_back(f.metrics.recall);
  }
  agg.accuracy = mean_sd(acc);
  agg.precision = mean_sd(prec);
  agg.recall = mean_sd(rec);
  agg.pooled = evaluate(pooled, threshold);
  agg.pooled_auc = auc_or_nan(pooled);
  return agg;
}

namespace {

// Aggregate over subjects: one (accuracy, precision, recall) triple per
// subject from its pooled 45 predictions.
Aggregate aggregate_subjects(
    const std::map<int, std::vector<std::pair<double, double>>>& by_subject,
    const std::vector<std::pair<double, double>>& pooled, double threshold,
    std::vector<std::pair<int, double>>& subject_accuracy) {
  Aggregate agg;
  std::vector<double> acc, prec, rec;
  for (const auto& [subject, preds] : by_subject) {
    const Metrics m = evaluate(preds, threshold);
    acc.push_back(m.accuracy);
    prec.push_back(m.precision);
    rec.push_back(m.recall);
    subject_accuracy.emplace_back(subject, m.accuracy);
  }
  agg.accuracy = mean_sd(acc);
  agg.precision = mean_sd(prec);
  agg.recall = mean_sd(rec);
  agg.pooled = evaluate(pooled, threshold);
  agg.pooled_auc = auc_or_nan(pooled);
  return agg;
}

void maybe_save_model(const ExperimentConfig& cfg, const nn::Model& model,
                      const std::string& name) {
  if (!cfg.save_models || cfg.out_dir.empty()) return;
  const auto dir = std::filesystem::path(cfg.out_dir) / "models";
  std::filesystem::create_directories(dir);
  nn::save_checkpoint((dir / name).string(), model);
}

ExperimentResult run_cross(const features::FeatureStore& store,
                           const ExperimentConfig& cfg) {
  std::set<int> subject_set;
  for (const auto& item : store.items) subject_set.insert(item.subject);
  std::vector<int> subjects(subject_set.begin(), subject_set.end());

  ExperimentResult result;
  result.scheme = Scheme::Cross;
  result.seed = cfg.seed;
  result.plan = make_folds(subjects, Scheme::Cross, cfg.seed);
  const std::size_t n_folds = result.plan.test_units.size();
  result.folds.resize(n_folds);

  parallel_for(n_folds, cfg.jobs, [&](std::size_t f) {
    const std::set<int> test_subjects(result.plan.test_units[f].begin(),
                                      result.plan.test_units[f].end());
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < store.size(); ++i) {
      (test_subjects.count(store.items[i].subject) > 0 ? test_idx : train_idx)
          .push_back(i);
    }
    std::vector<features::FeatureTensor> train_arena, test_arena;
    const auto train_items = collect(store, train_idx, train_arena);
    const auto test_items = collect(store, test_idx, test_arena);

    const nn::Model model = train_model(train_items, cfg.train, cfg.seed,
                                        static_cast<std::uint64_t>(f), 0);
    FoldResult& fr = result.folds[f];
    fr.fold = static_cast<int>(f);
    fr.test_units = result.plan.test_units[f];
    fr.predictions = predict_all(model, test_items);
    fr.metrics = evaluate(fr.predictions, cfg.threshold);
    fr.auc = auc_or_nan(fr.predictions);

    char name[32];
    std::snprintf(name, sizeof(name), "fold_%02zu.alsm", f);
    maybe_save_model(cfg, model, name);
    logln::info("harness",
                "scheme=cross fold=" + std::to_string(f) +
                    " acc=" + std::to_string(fr.metrics.accuracy) +
                    " n_test=" + std::to_string(fr.predictions.size()));
  });

  std::vector<std::pair<double, double>> pooled;
  for (const auto& f : result.folds) {
    pooled.insert(pooled.end(), f.predictions.begin(), f.predictions.end());
  }
  result.aggregate = aggregate_folds(result.folds, pooled, cfg.threshold);
  result.roc = roc_auc(pooled);
  return result;
}

ExperimentResult run_intra(const features::FeatureStore& store,
                           const ExperimentConfig& cfg) {
  // Group item indices by subject; ordering is the store's (stable).
  std::map<int, std::vector<std::size_t>> by_subject;
  for (std::size_t i = 0; i < store.size(); ++i) {
    by_subject[store.items[i].subject].push_back(i);
  }
  std::vector<std::pair<int, std::vector<std::size_t>>> subjects(
      by_subject.begin(), by_subject.end());

  ExperimentResult result;
  result.scheme = Scheme::Intra;
  result.seed = cfg.seed;

  struct SubjectRun {
    std::vector<FoldResult> folds;
    std::vector<std::pair<double, double>> pooled;
  };
  std::vector<SubjectRun> runs(subjects.size());

  parallel_for(subjects.size(), cfg.jobs, [&](std::size_t si) {
    const auto& [subject, items] = subjects[si];
    std::vector<int> segment_ids(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      segment_ids[i] = static_cast<int>(i);
    }
    const FoldPlan plan =
        make_folds(segment_ids, Scheme::Intra,
                   Rng::derive(cfg.seed, "intra-plan",
                               static_cast<std::uint64_t>(subject)));
    SubjectRun& run = runs[si];
    run.folds.resize(plan.test_units.size());
    for (std::size_t f = 0; f < plan.test_units.size(); ++f) {
      const std::set<int> test_ids(plan.test_units[f].begin(),
                                   plan.test_units[f].end());
      std::vector<std::size_t> train_idx, test_idx;
      for (std::size_t i = 0; i < items.size(); ++i) {
        (test_ids.count(static_cast<int>(i)) > 0 ? test_idx : train_idx)
            .push_back(items[i]);
      }
      std::vector<features::FeatureTensor> train_arena, test_arena;
      const auto train_items = collect(store, train_idx, train_arena);
      const auto test_items = collect(store, test_idx, test_arena);
      const nn::Model model =
          train_model(train_items, cfg.train, cfg.seed,
                      static_cast<std::uint64_t>(subject), f);
      FoldResult& fr = run.folds[f];
      fr.fold = static_cast<int>(f);
      fr.subject = subject;
      fr.test_units = plan.test_units[f];
      fr.predictions = predict_all(model, test_items);
      fr.metrics = evaluate(fr.predictions, cfg.threshold);
      fr.auc = auc_or_nan(fr.predictions);
      run.pooled.insert(run.pooled.end(), fr.predictions.begin(),
                        fr.predictions.end());
    }
    logln::info("harness",
                "scheme=intra subject=" + std::to_string(subject) +
                    " acc=" +
                    std::to_string(evaluate(run.pooled, cfg.threshold)
                                       .accuracy));
  });

  std::map<int, std::vector<std::pair<double, double>>> subject_preds;
  std::vector<std::pair<double, double>> pooled;
  for (std::size_t si = 0; si < subjects.size(); ++si) {
    subject_preds[subjects[si].first] = runs[si].pooled;
    for (auto& fr : runs[si].folds) {
      result.folds.push_back(std::move(fr));
    }
    pooled.insert(pooled.end(), runs[si].pooled.begin(),
                  runs[si].pooled.end());
  }
  result.aggregate = aggregate_subjects(subject_preds, pooled, cfg.threshold,
                                        result.subject_accuracy);
  result.roc = roc_auc(pooled);
  return result;
}

}  // namespace

ExperimentResult run_experiment(const features::FeatureStore& store,
                                const ExperimentConfig& cfg) {
  if (store.size() == 0) {
    throw std::invalid_argument("run_experiment: empty feature store");
  }
  if (cfg.train.model.n_steps != store.n_steps ||
      cfg.train.model.input_dim != store.n_features) {
    throw std::invalid_argument(
        "run_experiment: model dims do not match the feature store");
  }
  ExperimentResult result = cfg.scheme == Scheme::Cross
                                ? run_cross(store, cfg)
                                : run_intra(store, cfg);
  if (!cfg.out_dir.empty()) {
    write_experiment_outputs(result, cfg.out_dir);
  }
  return result;
}

void write_experiment_outputs(const ExperimentResult& result,
                              const std::string& dir) {
  std::filesystem::create_directories(dir);

  nlohmann::json doc;
  doc["scheme"] = to_string(result.scheme);
  doc["seed"] = result.seed;
  auto folds = nlohmann::json::array();
  for (const auto& f : result.folds) {
    nlohmann::json jf = {{"fold", f.fold},
                         {"metrics", metrics_to_json(f.metrics)},
                         {"auc", auc_to_json(f.auc)},
                         {"test_units", f.test_units},
                         {"n_test", f.predictions.size()}};
    if (f.subject >= 0) jf["subject"] = f.subject;
    folds.push_back(std::move(jf));
  }
  doc["folds"] = std::move(folds);
  if (result.scheme == Scheme::Intra) {
    auto subjects = nlohmann::json::array();
    for (const auto& [subject, acc] : result.subject_accuracy) {
      subjects.push_back({{"subject", subject}, {"accuracy", acc}});
    }
    doc["subjects"] = std::move(subjects);
  }
  doc["aggregate"] = {
      {"accuracy",
       {{"mean", result.aggregate.accuracy.mean},
        {"sd", result.aggregate.accuracy.sd}}},
      {"precision",
       {{"mean", result.aggregate.precision.mean},
        {"sd", result.aggregate.precision.sd}}},
      {"recall",
       {{"mean", result.aggregate.recall.mean},
        {"sd", result.aggregate.recall.sd}}},
      {"pooled", metrics_to_json(result.aggregate.pooled)},
      {"pooled_auc", auc_to_json(result.aggregate.pooled_auc)}};

  std::ofstream mf(std::filesystem::path(dir) / "metrics.json",
                   std::ios::trunc);
  mf << doc.dump(2) << "\n";

  std::ofstream rf(std::filesystem::path(dir) / "roc.csv", std::ios::trunc);
  rf << "fpr,tpr\n";
  rf.precision(17);
  for (std::size_t i = 0; i < result.roc.fpr.size(); ++i) {
    rf << result.roc.fpr[i] << "," << result.roc.tpr[i] << "\n";
  }

  nlohmann::json plan;
  plan["scheme"] = to_string(result.scheme);
  plan["seed"] = result.seed;
  plan["folds"] = result.plan.test_units;
  std::ofstream pf(std::filesystem::path(dir) / "plan.json", std::ios::trunc);
  pf << plan.dump(2) << "\n";
}

ExperimentResult baseline_logreg(const features::FeatureStore& store,
                                 const ExperimentConfig& cfg,
                                 const BaselineSpec& spec) {
  if (cfg.scheme != Scheme::Cross) {
    throw std::invalid_argument("baseline_logreg: cross scheme only");
  }
  std::set<int> subject_set;
  for (const auto& item : store.items) subject_set.insert(item.subject);
  std::vector<int> subjects(subject_set.begin(), subject_set.end());

  const std::size_t dim = static_cast<std::size_t>(store.n_steps) *
                          static_cast<std::size_t>(store.n_features);

  ExperimentResult result;
  result.scheme = Scheme::Cross;
  result.seed = cfg.seed;
  result.plan = make_folds(subjects, Scheme::Cross, cfg.seed);
  result.folds.resize(result.plan.test_units.size());

  parallel_for(result.plan.test_units.size(), cfg.jobs, [&](std::size_t f) {
    const std::set<int> test_subjects(result.plan.test_units[f].begin(),
                                      result.plan.test_units[f].end());
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < store.size(); ++i) {
      (test_subjects.count(store.items[i].subject) > 0 ? test_idx : train_idx)
          .push_back(i);
    }
    // Per-fold standardization from the training rows only.
    const auto row = [&](std::size_t item, Eigen::VectorXd& x) {
      const auto block = store.rows(item);
      for (std::size_t k = 0; k < dim; ++k) {
        x(static_cast<Eigen::Index>(k)) = static_cast<double>(block[k]);
      }
    };
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    Eigen::VectorXd x(static_cast<Eigen::Index>(dim));
    for (const std::size_t i : train_idx) {
      row(i, x);
      mean += x;
    }
    mean /= static_cast<double>(train_idx.size());
    Eigen::VectorXd var = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    for (const std::size_t i : train_idx) {
      row(i, x);
      var.array() += (x - mean).array().square();
    }
    var /= static_cast<double>(train_idx.size());
    Eigen::VectorXd scale =
        (var.array() > 0.0).select(var.array().sqrt(), 1.0).inverse();

    Eigen::MatrixXd xtr(static_cast<Eigen::Index>(train_idx.size()),
                        static_cast<Eigen::Index>(dim));
    Eigen::VectorXd ytr(static_cast<Eigen::Index>(train_idx.size()));
    for (std::size_t i = 0; i < train_idx.size(); ++i) {
      row(train_idx[i], x);
      xtr.row(static_cast<Eigen::Index>(i)) =
          ((x - mean).array() * scale.array()).matrix();
      ytr(static_cast<Eigen::Index>(i)) =
          nn::label_value(store.items[train_idx[i]].label);
    }

    // Plain full-batch gradient descent on mean BCE + l2*|w|^2.
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    double b = 0.0;
    const double n = static_cast<double>(train_idx.size());
    for (int it = 0; it < spec.iterations; ++it) {
      const Eigen::VectorXd z = (xtr * w).array() + b;
      const Eigen::VectorXd p =
          z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
      const Eigen::VectorXd err = p - ytr;
      const Eigen::VectorXd gw = xtr.transpose() * err / n + 2.0 * spec.l2 * w;
      const double gb = err.sum() / n;
      w -= spec.lr * gw;
      b -= spec.lr * gb;
    }

    FoldResult& fr = result.folds[f];
    fr.fold = static_cast<int>(f);
    fr.test_units = result.plan.test_units[f];
    fr.predictions.reserve(test_idx.size());
    for (const std::size_t i : test_idx) {
      row(i, x);
      const double z =
          ((x - mean).array() * scale.array()).matrix().dot(w) + b;
      fr.predictions.emplace_back(1.0 / (1.0 + std::exp(-z)),
                                  nn::label_value(store.items[i].label));
    }
    fr.metrics = evaluate(fr.predictions, cfg.threshold);
    fr.auc = auc_or_nan(fr.predictions);
    logln::info("harness",
                "baseline fold=" + std::to_string(f) +
                    " acc=" + std::to_string(fr.metrics.accuracy));
  });

  std::vector<std::pair<double, double>> pooled;
  for (const auto& f : result.folds) {
    pooled.insert(pooled.end(), f.predictions.begin(), f.predictions.end());
  }
  result.aggregate = aggregate_folds(result.folds, pooled, cfg.threshold);
  result.roc = roc_auc(pooled);
  return result;
}

std::vector<SweepRow> segment_size_sweep(
    std::span<const double> sizes,
    const std::function<ExperimentResult(double)>& run_at_size) {
  std::vector<SweepRow> rows;
  rows.reserve(sizes.size());
  for (const double size : sizes) {
    const ExperimentResult r = run_at_size(size);
    SweepRow row;
    row.segment_len = size;
    row.accuracy = r.aggregate.accuracy;
    rows.push_back(row);
    logln::info("harness",
                "sweep size=" + std::to_string(size) +
                    " acc=" + std::to_string(row.accuracy.mean));
  }
  return rows;
}

}  // namespace eegmc::harness
