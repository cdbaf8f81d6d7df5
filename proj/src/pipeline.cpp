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

#include "eegmc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include "eegmc/log.hpp"
#include "eegmc/parallel.hpp"

namespace eegmc::pipeline {

Prepared preprocess(const edf::Recording& rec, const dsp::FilterSpec& filter,
                    const std::set<int>& excluded) {
  Prepared prep;
  prep.subject = rec.subject;
  prep.run = rec.run;
  prep.fs = rec.fs;
  prep.montage = dsp::make_montage(rec.channel_labels);

  auto diffs = dsp::apply_montage(rec, prep.montage);
  prep.channels.reserve(diffs.size());
  for (auto& d : diffs) {
    d = dsp::notch_filter(d, filter);
    d = dsp::bandpass_filter(d, filter);
    d = dsp::minmax_normalize(d);
    prep.channels.push_back(std::move(d.samples));
  }

  for (const auto& trial : edf::extract_trials(rec, excluded)) {
    const std::int64_t duration = static_cast<std::int64_t>(
        trial.data.empty() ? 0 : trial.data.front().size());
    prep.trials.push_back(TrialMark{trial.kind, trial.onset_sample, duration});
  }
  return prep;
}

std::vector<features::FeatureTensor> featurize_trials(
    const Prepared& prep, const FeaturizeOptions& opt, int first_trial,
    int* dropped) {
  if (prep.channels.empty()) {
    throw std::invalid_argument("featurize_trials: no channels");
  }
  features::SegmentSpec spec = opt.segment;
  if (spec.fs == 0.0) spec.fs = prep.fs;

  const std::size_t w = features::window_samples(spec);
  const std::size_t hop = features::hop_samples(spec);
  const std::size_t span =
      w + static_cast<std::size_t>(spec.n_steps - 1) * hop;
  const std::int64_t n =
      static_cast<std::int64_t>(prep.channels.front().size());
  const std::int64_t shift =
      static_cast<std::int64_t>(std::llround(opt.offset_seconds * spec.fs));

  std::vector<features::FeatureTensor> out;
  out.reserve(prep.trials.size());
  int trial_id = first_trial;
  int n_dropped = 0;
  for (const auto& mark : prep.trials) {
    const std::int64_t start = mark.onset_sample + shift;
    if (start < 0 || start + static_cast<std::int64_t>(span) > n ||
        (opt.clip_to_trial &&
         (shift < 0 ||
          shift + static_cast<std::int64_t>(span) > mark.duration_samples))) {
      ++n_dropped;
      continue;
    }
    const auto windows = features::segment(
        prep.channels, spec, static_cast<std::size_t>(start));
    features::FeatureTensor tensor =
        features::featurize_segment(windows, spec.fs, opt.divisor);
    tensor.label = mark.kind;
    tensor.subject = prep.subject;
    tensor.trial = trial_id++;
    tensor.offset_seconds = opt.offset_seconds;
    out.push_back(std::move(tensor));
  }
  if (n_dropped > 0) {
    logln::warn("pipeline",
                "subject=" + std::to_string(prep.subject) +
                    " run=" + std::to_string(prep.run) +
                    " dropped=" + std::to_string(n_dropped) +
                    " reason=segment_out_of_range");
  }
  if (dropped != nullptr) *dropped = n_dropped;
  return out;
}

features::FeatureStore build_store(std::vector<std::string> paths,
                                   const dsp::FilterSpec& filter,
                                   const FeaturizeOptions& opt,
                                   const std::set<int>& excluded, int jobs) {
  std::sort(paths.begin(), paths.end());

  struct FileResult {
    int subject = 0;
    std::vector<features::FeatureTensor> tensors;  // trial ids start at 0
  };
  std::vector<FileResult> results(paths.size());

  const auto work = [&](std::size_t i) {
    const edf::Recording rec = edf::load_edf_file(paths[i]);
    if (excluded.count(rec.subject) > 0) {
      logln::info("pipeline", "skip subject=" + std::to_string(rec.subject) +
                                  " reason=excluded");
      return;
    }
    const Prepared prep = preprocess(rec, filter, excluded);
    results[i].subject = prep.subject;
    results[i].tensors = featurize_trials(prep, opt);
  };

  parallel_for(paths.size(), jobs, work);

  features::FeatureStore store;
  std::map<int, int> next_trial;  // per-subject running trial id
  for (auto& file : results) {
    if (file.tensors.empty()) continue;
    int& counter = next_trial[file.subject];
    for (auto& tensor : file.tensors) {
      tensor.trial = counter++;
      store.add(tensor);
    }
  }
  logln::info("pipeline", "store items=" + std::to_string(store.size()) +
                              " subjects=" +
                              std::to_string(next_trial.size()));
  return store;
}

}  // namespace eegmc::pipeline
