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

#include "eegmc/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "eegmc/features.hpp"
#include "eegmc/log.hpp"
#include "eegmc/parallel.hpp"
#include "eegmc/rng.hpp"
#include "json.hpp"

namespace eegmc::analysis {

namespace {

void check_labels(const Eigen::MatrixXd& x, std::span<const int> y) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw std::invalid_argument("label count does not match rows");
  }
  for (const int v : y) {
    if (v != 0 && v != 1) throw std::invalid_argument("labels must be 0 or 1");
  }
}

}  // namespace

FeatureMatrix feature_matrix(const features::FeatureStore& store) {
  if (store.size() == 0) throw std::invalid_argument("empty feature store");
  const std::size_t steps = static_cast<std::size_t>(store.n_steps);
  const std::size_t d = static_cast<std::size_t>(store.n_features);
  FeatureMatrix out;
  out.x.resize(static_cast<Eigen::Index>(store.size() * steps),
               static_cast<Eigen::Index>(d));
  out.y.reserve(store.size() * steps);
  for (std::size_t i = 0; i < store.size(); ++i) {
    const std::span<const float> block = store.rows(i);
    const int label = store.items[i].label == edf::Side::Right ? 1 : 0;
    for (std::size_t s = 0; s < steps; ++s) {
      const Eigen::Index row = static_cast<Eigen::Index>(i * steps + s);
      for (std::size_t j = 0; j < d; ++j) {
        out.x(row, static_cast<Eigen::Index>(j)) =
            static_cast<double>(block[s * d + j]);
      }
      out.y.push_back(label);
    }
  }
  return out;
}

void validate(const RfConfig& cfg) {
  if (cfg.n_trees < 1) throw std::invalid_argument("n_trees must be positive");
  if (cfg.max_depth < 1) {
    throw std::invalid_argument("max_depth must be positive");
  }
  if (cfg.mtry < 0) throw std::invalid_argument("mtry must be non-negative");
  if (cfg.jobs < 1) throw std::invalid_argument("jobs must be positive");
}

namespace {

// One tree's recursive CART fit over bootstrap row ids. Split quality is
// the unnormalized Gini decrease n*g(node) - nl*g(left) - nr*g(right),
// computed from integer class counts, so the fitted structure depends
// only on per-feature value order and the rng stream: strictly monotone
// per-feature rescaling leaves the tree and its importance unchanged.
struct TreeFit {
  const Eigen::MatrixXd& x;
  std::span<const int> y;
  int max_depth;
  int mtry;
  Rng& rng;
  std::vector<int> feat;                   // candidate scratch, permuted
  std::vector<std::pair<double, int>> sv;  // (value, class) sort scratch
  std::vector<double> importance;

  TreeFit(const Eigen::MatrixXd& x_, std::span<const int> y_, int depth,
          int mtry_, Rng& rng_)
      : x(x_), y(y_), max_depth(depth), mtry(mtry_), rng(rng_) {
    feat.resize(static_cast<std::size_t>(x.cols()));
    std::iota(feat.begin(), feat.end(), 0);
    importance.assign(static_cast<std::size_t>(x.cols()), 0.0);
  }

  static double node_gini(std::size_t n, std::size_t c1) {
    const double dn = static_cast<double>(n);
    const double d0 = static_cast<double>(n - c1);
    const double d1 = static_cast<double>(c1);
    return dn - (d0 * d0 + d1 * d1) / dn;
  }

  void grow(std::span<int> idx, int depth) {
    const std::size_t n = idx.size();
    if (n < 2 || depth >= max_depth) return;
    std::size_t c1 = 0;
    for (const int i : idx) c1 += static_cast<std::size_t>(y[i]);
    if (c1 == 0 || c1 == n) return;

    const std::size_t d = feat.size();
    for (int j = 0; j < mtry; ++j) {
      const std::size_t k =
          static_cast<std::size_t>(j) +
          rng.below(static_cast<std::uint64_t>(d - static_cast<std::size_t>(j)));
      std::swap(feat[static_cast<std::size_t>(j)], feat[k]);
    }

    const double parent = node_gini(n, c1);
    double best_dec = 1e-9;
    int best_feature = -1;
    double best_value = 0.0;  // left side takes values <= best_value
    for (int j = 0; j < mtry; ++j) {
      const int f = feat[static_cast<std::size_t>(j)];
      sv.clear();
      for (const int i : idx) sv.emplace_back(x(i, f), y[i]);
      std::sort(sv.begin(), sv.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      std::size_t c1_left = 0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        c1_left += static_cast<std::size_t>(sv[k].second);
        if (sv[k].first == sv[k + 1].first) continue;
        const double dec = parent - node_gini(k + 1, c1_left) -
                           node_gini(n - k - 1, c1 - c1_left);
        if (dec > best_dec) {
          best_dec = dec;
          best_feature = f;
          best_value = sv[k].first;
        }
      }
    }
    if (best_feature < 0) return;

    importance[static_cast<std::size_t>(best_feature)] += best_dec;
    int* const mid =
        std::partition(idx.data(), idx.data() + n, [&](const int i) {
          return x(i, best_feature) <= best_value;
        });
    const std::size_t nl = static_cast<std::size_t>(mid - idx.data());
    grow(idx.subspan(0, nl), depth + 1);
    grow(idx.subspan(nl), depth + 1);
  }
};

}  // namespace

std::vector<double> rf_importance(const Eigen::MatrixXd& x,
                                  std::span<const int> y,
                                  const RfConfig& cfg) {
  validate(cfg);
  check_labels(x, y);
  const std::size_t n = static_cast<std::size_t>(x.rows());
  const std::size_t d = static_cast<std::size_t>(x.cols());
  if (n < 100) throw std::invalid_argument("need at least 100 rows");
  if (d == 0) throw std::invalid_argument("need at least one feature");
  const std::size_t n_pos =
      static_cast<std::size_t>(std::accumulate(y.begin(), y.end(), 0));
  if (n_pos == 0 || n_pos == n) {
    throw std::invalid_argument("both classes must be present");
  }
  const int mtry =
      cfg.mtry > 0
          ? std::min<int>(cfg.mtry, static_cast<int>(d))
          : std::max<int>(1, static_cast<int>(std::lround(
                                 std::sqrt(static_cast<double>(d)))));

  std::vector<std::vector<double>> per_tree(
      static_cast<std::size_t>(cfg.n_trees));
  parallel_for(per_tree.size(), cfg.jobs, [&](std::size_t t) {
    Rng rng = Rng::stream(cfg.seed, "rf-tree", static_cast<std::uint64_t>(t));
    std::vector<int> idx(n);
    for (auto& i : idx) i = static_cast<int>(rng.below(n));
    TreeFit fit(x, y, cfg.max_depth, mtry, rng);
    fit.grow(std::span<int>(idx), 0);
    const double total =
        std::accumulate(fit.importance.begin(), fit.importance.end(), 0.0);
    if (total > 0.0) {
      for (auto& v : fit.importance) v /= total;
    }
    per_tree[t] = std::move(fit.importance);
  });

  std::vector<double> importance(d, 0.0);
  for (const auto& tree : per_tree) {
    for (std::size_t j = 0; j < d; ++j) importance[j] += tree[j];
  }
  const double total =
      std::accumulate(importance.begin(), importance.end(), 0.0);
  if (total > 0.0) {
    for (auto& v : importance) v /= total;
  } else {
    std::fill(importance.begin(), importance.end(),
              1.0 / static_cast<double>(d));
  }
  return importance;
}

std::vector<double> significance_test(const Eigen::MatrixXd& x,
                                      std::span<const int> y, int jobs) {
  check_labels(x, y);
  const std::size_t n = static_cast<std::size_t>(x.rows());
  const std::size_t n1 =
      static_cast<std::size_t>(std::accumulate(y.begin(), y.end(), 0));
  const std::size_t n0 = n - n1;
  if (n0 < 20 || n1 < 20) {
    throw std::invalid_argument("need at least 20 rows per class");
  }

  const double dn = static_cast<double>(n);
  const double dn0 = static_cast<double>(n0);
  const double dn1 = static_cast<double>(n1);
  const double mu = dn0 * dn1 / 2.0;

  std::vector<double> p(static_cast<std::size_t>(x.cols()), 1.0);
  parallel_for(p.size(), jobs, [&](std::size_t f) {
    std::vector<std::pair<double, int>> sv;
    sv.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      sv.emplace_back(x(static_cast<Eigen::Index>(i),
                        static_cast<Eigen::Index>(f)),
                      y[i]);
    }
    std::sort(sv.begin(), sv.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    // Rank sum of class 1 with average ranks over tie groups, plus the
    // tie term sum(t^3 - t) for the variance correction.
    double r1 = 0.0;
    double tie_sum = 0.0;
    for (std::size_t a = 0; a < n;) {
      std::size_t b = a + 1;
      while (b < n && sv[b].first == sv[a].first) ++b;
      const double t = static_cast<double>(b - a);
      const double avg_rank = static_cast<double>(a + 1 + b) / 2.0;
      std::size_t ones = 0;
      for (std::size_t k = a; k < b; ++k) {
        ones += static_cast<std::size_t>(sv[k].second);
      }
      r1 += avg_rank * static_cast<double>(ones);
      tie_sum += t * t * t - t;
      a = b;
    }

    const double u1 = r1 - dn1 * (dn1 + 1.0) / 2.0;
    const double sigma2 =
        dn0 * dn1 / 12.0 * ((dn + 1.0) - tie_sum / (dn * (dn - 1.0)));
    if (!(sigma2 > 0.0)) return;  // constant or fully tied: keep p = 1
    const double z =
        std::max(0.0, (std::abs(u1 - mu) - 0.5) / std::sqrt(sigma2));
    p[f] = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  });
  return p;
}

ImportanceReport make_report(std::vector<double> importance,
                             std::vector<double> p_values, double alpha) {
  if (importance.size() != p_values.size() || importance.empty()) {
    throw std::invalid_argument("importance and p-value sizes differ");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must be in (0, 1)");
  }
  ImportanceReport report;
  report.importance = std::move(importance);
  report.p_values = std::move(p_values);
  report.alpha = alpha;
  report.threshold = alpha / static_cast<double>(report.importance.size());
  report.ranking.resize(static_cast<int>(report.importance.size()));
  std::iota(report.ranking.begin(), report.ranking.end(), 0);
  std::sort(report.ranking.begin(), report.ranking.end(),
            [&](const int a, const int b) {
              const double ia = report.importance[static_cast<std::size_t>(a)];
              const double ib = report.importance[static_cast<std::size_t>(b)];
              return ia != ib ? ia > ib : a < b;
            });
  report.significant.resize(report.importance.size());
  for (std::size_t i = 0; i < report.significant.size(); ++i) {
    report.significant[i] = report.p_values[i] < report.threshold ? 1 : 0;
  }
  return report;
}

TopFeatures top_k_features(const ImportanceReport& report, int k) {
  if (k < 1) throw std::invalid_argument("k must be positive");
  TopFeatures top;
  for (const int f : report.ranking) {
    if (!report.significant[static_cast<std::size_t>(f)]) continue;
    if (static_cast<int>(top.indices.size()) == k) return top;
    top.indices.push_back(f);
  }
  top.short_of_k = static_cast<int>(top.indices.size()) < k;
  return top;
}

namespace {

// Frozen montage order: left electrode of pair p, where feature i belongs
// to pair i / 11. This table is a file and report contract; never reorder.
constexpr std::array<const char*, 27> kPairLeft = {
    "Af3", "Af7", "C1",  "C3",  "C5",  "Cp1", "Cp3", "Cp5", "F1",
    "F3",  "F5",  "F7",  "Fc1", "Fc3", "Fc5", "Fp1", "Ft7", "O1",
    "P1",  "P3",  "P5",  "P7",  "Po3", "Po7", "T7",  "T9",  "Tp7"};

std::string mirror_label(const std::string& left) {
  const std::size_t cut = left.find_last_not_of("0123456789") + 1;
  const int num = std::stoi(left.substr(cut));
  return left.substr(0, cut) + std::to_string(num + 1);
}

}  // namespace

std::span<const char* const> pair_left_labels() {
  return std::span<const char* const>(kPairLeft.data(), kPairLeft.size());
}

std::string pair_label(int pair) {
  if (pair < 0 || pair >= static_cast<int>(kPairLeft.size())) {
    throw std::out_of_range("pair index out of range");
  }
  const std::string left = kPairLeft[static_cast<std::size_t>(pair)];
  return left + "-" + mirror_label(left);
}

std::string feature_label(int feature) {
  if (feature < 0 || feature >= features::kFeatureDim) {
    throw std::out_of_range("feature index out of range");
  }
  return pair_label(feature / features::kFeaturesPerChannel) + " " +
         features::kFeatureNames[static_cast<std::size_t>(
             feature % features::kFeaturesPerChannel)];
}

SensorRanking sensor_ranking(std::span<const int> top_features) {
  std::array<int, 27> counts{};
  for (const int f : top_features) {
    if (f < 0 || f >= features::kFeatureDim) {
      throw std::out_of_range("feature index out of range");
    }
    ++counts[static_cast<std::size_t>(f / features::kFeaturesPerChannel)];
  }
  SensorRanking ranking;
  ranking.rows.reserve(counts.size());
  for (int p = 0; p < static_cast<int>(counts.size()); ++p) {
    ranking.rows.push_back(
        PairCount{p, pair_label(p), counts[static_cast<std::size_t>(p)]});
  }
  std::sort(ranking.rows.begin(), ranking.rows.end(),
            [](const PairCount& a, const PairCount& b) {
              return a.count != b.count ? a.count > b.count : a.pair < b.pair;
            });
  return ranking;
}

std::string sensor_ranking_csv(const SensorRanking& ranking) {
  std::string csv = "pair,count\n";
  for (const auto& row : ranking.rows) {
    csv += row.label + "," + std::to_string(row.count) + "\n";
  }
  return csv;
}

Quartiles quartiles(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("quartiles of empty set");
  std::sort(values.begin(), values.end());
  const auto at = [&](double q) {
    const double h = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 == values.size()) return values[lo];
    return values[lo] + (h - static_cast<double>(lo)) *
                            (values[lo + 1] - values[lo]);
  };
  return Quartiles{values.front(), at(0.25), at(0.5), at(0.75),
                   values.back()};
}

std::vector<QuartileRow> top_quartiles(const Eigen::MatrixXd& x,
                                       std::span<const int> y,
                                       std::span<const int> ranking, int k) {
  check_labels(x, y);
  std::vector<QuartileRow> rows;
  const int take = std::min<int>(k, static_cast<int>(ranking.size()));
  for (int r = 0; r < take; ++r) {
    const int f = ranking[static_cast<std::size_t>(r)];
    std::vector<double> left, right;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      (y[static_cast<std::size_t>(i)] == 0 ? left : right)
          .push_back(x(i, f));
    }
    rows.push_back(QuartileRow{f, feature_label(f), quartiles(std::move(left)),
                               quartiles(std::move(right))});
  }
  return rows;
}

TemporalCurve temporal_accuracy(const std::vector<nn::Model>& fold_models,
                                const harness::FoldPlan& plan,
                                const std::vector<pipeline::Prepared>& recordings,
                                const pipeline::FeaturizeOptions& opt,
                                double hop_seconds, double threshold,
                                int jobs) {
  if (plan.scheme != harness::Scheme::Cross) {
    throw std::invalid_argument("temporal accuracy needs a cross-subject plan");
  }
  if (fold_models.size() != plan.test_units.size() || fold_models.empty()) {
    throw std::invalid_argument("one model per fold required");
  }
  if (!(hop_seconds > 0.0)) {
    throw std::invalid_argument("hop must be positive");
  }
  if (recordings.empty()) {
    throw std::invalid_argument("no recordings to evaluate");
  }

  std::map<int, std::size_t> fold_of;  // subject -> fold
  for (std::size_t f = 0; f < plan.test_units.size(); ++f) {
    for (const int subject : plan.test_units[f]) fold_of[subject] = f;
  }

  TemporalCurve curve;
  const std::size_t n_folds = fold_models.size();
  for (int step = 0;; ++step) {
    pipeline::FeaturizeOptions slid = opt;
    slid.clip_to_trial = true;
    slid.offset_seconds =
        opt.offset_seconds + static_cast<double>(step) * hop_seconds;

    std::vector<std::vector<features::FeatureTensor>> per_recording(
        recordings.size());
    parallel_for(recordings.size(), jobs, [&](std::size_t i) {
      if (fold_of.count(recordings[i].subject) == 0) return;
      per_recording[i] = pipeline::featurize_trials(recordings[i], slid);
    });

    std::vector<std::vector<const features::FeatureTensor*>> fold_items(
        n_folds);
    for (const auto& tensors : per_recording) {
      for (const auto& tensor : tensors) {
        fold_items[fold_of.at(tensor.subject)].push_back(&tensor);
      }
    }
    if (std::any_of(fold_items.begin(), fold_items.end(),
                    [](const auto& v) { return v.empty(); })) {
      break;
    }

    std::vector<double> acc(n_folds, 0.0);
    parallel_for(n_folds, jobs, [&](std::size_t f) {
      const auto preds = harness::predict_all(fold_models[f], fold_items[f]);
      acc[f] = harness::evaluate(preds, threshold).accuracy;
    });
    curve.offsets.push_back(slid.offset_seconds);
    curve.accuracy.push_back(harness::mean_sd(acc));
    curve.fold_accuracy.push_back(std::move(acc));
  }
  logln::info("analysis",
              "temporal_offsets=" + std::to_string(curve.offsets.size()));
  return curve;
}

namespace {

nlohmann::json quartiles_json(const Quartiles& q) {
  return nlohmann::json{{"min", q.min},
                        {"q1", q.q1},
                        {"median", q.median},
                        {"q3", q.q3},
                        {"max", q.max}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

void write_analysis_outputs(const std::string& dir,
                            const ImportanceReport& report,
                            const TopFeatures& top,
                            const SensorRanking& ranking,
                            const std::vector<QuartileRow>& quartile_rows) {
  const std::filesystem::path base(dir);
  std::filesystem::create_directories(base);

  nlohmann::json importance;
  importance["alpha"] = report.alpha;
  importance["threshold"] = report.threshold;
  importance["importance"] = report.importance;
  importance["p_values"] = report.p_values;
  importance["ranking"] = report.ranking;
  std::vector<bool> significant(report.significant.begin(),
                                report.significant.end());
  importance["significant"] = significant;
  write_text(base / "importance.json", importance.dump(2) + "\n");

  nlohmann::json top_json;
  top_json["short_of_k"] = top.short_of_k;
  top_json["features"] = nlohmann::json::array();
  for (const int f : top.indices) {
    top_json["features"].push_back(
        {{"index", f},
         {"label", feature_label(f)},
         {"importance", report.importance[static_cast<std::size_t>(f)]},
         {"p_value", report.p_values[static_cast<std::size_t>(f)]}});
  }
  write_text(base / "top_features.json", top_json.dump(2) + "\n");

  write_text(base / "sensor_ranking.csv", sensor_ranking_csv(ranking));

  nlohmann::json quartiles_out = nlohmann::json::array();
  for (const auto& row : quartile_rows) {
    quartiles_out.push_back({{"feature", row.feature},
                             {"label", row.label},
                             {"left", quartiles_json(row.left)},
                             {"right", quartiles_json(row.right)}});
  }
  write_text(base / "quartiles.json", quartiles_out.dump(2) + "\n");
  logln::info("analysis", "outputs dir=" + dir);
}

void write_temporal_csv(const std::string& path, const TemporalCurve& curve) {
  std::string csv = "offset,accuracy_mean,accuracy_sd\n";
  char buf[96];
  for (std::size_t i = 0; i < curve.offsets.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", curve.offsets[i],
                  curve.accuracy[i].mean, curve.accuracy[i].sd);
    csv += buf;
  }
  write_text(std::filesystem::path(path), csv);
}

}  // namespace eegmc::analysis
