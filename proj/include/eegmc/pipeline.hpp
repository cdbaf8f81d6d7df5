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
#include <set>
#include <string>
#include <vector>

#include "eegmc/dsp.hpp"
#include "eegmc/edf.hpp"
#include "eegmc/feature_store.hpp"
#include "eegmc/features.hpp"

namespace eegmc::pipeline {

/// Retained movement trial of a recording: its class, onset sample and
/// length (samples to the next annotation or the end of the recording).
struct TrialMark {
  edf::Side kind = edf::Side::Left;
  std::int64_t onset_sample = 0;
  std::int64_t duration_samples = 0;
};

/// A recording reduced to its montage channels, fully preprocessed:
/// montage, then notch, then band-pass, then per-channel min-max
/// normalization over the whole recording. Trials are cut afterwards so
/// filter transients never align with trial boundaries.
struct Prepared {
  int subject = 0;
  int run = 0;
  double fs = 0.0;
  dsp::Montage montage;
  std::vector<std::vector<double>> channels;  // 27 x n_samples, in [0, 1]
  std::vector<TrialMark> trials;
};

Prepared preprocess(const edf::Recording& rec,
                    const dsp::FilterSpec& filter = {},
                    const std::set<int>& excluded =
                        edf::default_excluded_subjects());

struct FeaturizeOptions {
  features::SegmentSpec segment;  // segment.fs == 0 takes the recording fs
  double offset_seconds = 0.0;    // segment start relative to trial onset
  features::BandDivisor divisor = features::BandDivisor::TotalPassband;
  bool clip_to_trial = false;  // also drop segments leaving the trial span
};

/// One tensor per trial whose full segment fits inside the recording at
/// the requested offset; short trials are dropped with a logged warning.
/// Trial ids run consecutively from `first_trial` over the retained
/// trials (drops do not consume an id).
std::vector<features::FeatureTensor> featurize_trials(
    const Prepared& prep, const FeaturizeOptions& opt, int first_trial = 0,
    int* dropped = nullptr);

/// Loads, preprocesses and featurizes EDF files into one store. Paths are
/// sorted lexicographically, which orders the standard S###R##.edf names
/// by (subject, run), and each subject's trial ids count up across that
/// subject's files. Files are processed in parallel up to `jobs`; the
/// store order is the sorted file order regardless of scheduling.
features::FeatureStore build_store(std::vector<std::string> paths,
                                   const dsp::FilterSpec& filter,
                                   const FeaturizeOptions& opt,
                                   const std::set<int>& excluded =
                                       edf::default_excluded_subjects(),
                                   int jobs = 1);

}  // namespace eegmc::pipeline
