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
#include <vector>

#include "eegmc/dsp.hpp"
#include "eegmc/edf.hpp"
#include "eegmc/feature_store.hpp"
#include "eegmc/pipeline.hpp"

namespace eegmc::synth {

/// Synthetic movement dataset. Each run holds 15 movements with T0 rest
/// spans between them; movement classes alternate T1/T2 with the starting
/// class rotating per run. The class signal is a 10 Hz tone on the left
/// electrode of each designated montage pair, with amplitude
/// alpha_amp * (1 + effect) for right-hand trials and
/// alpha_amp * (1 - effect) for left-hand trials, starting onset_delay
/// seconds after the movement onset. White noise rides on every
/// electrode. effect = 0 makes the classes indistinguishable.
struct SynthSpec {
  int n_subjects = 20;
  int trials_per_subject = 45;  // multiple of 15; 15 movements per run
  double fs = 160.0;
  double effect = 0.5;     // amplitude asymmetry, in [0, 1)
  double alpha_amp = 6.0;  // class tone amplitude, physical units
  double noise = 2.0;      // white-noise sigma per electrode
  double onset_delay = 0.0;             // seconds
  std::vector<int> pairs = {2, 3, 4};   // montage pair indices, 0-based
  std::uint64_t seed = 0;
};

void validate(const SynthSpec& spec);

/// Runs per subject: trials_per_subject / 15.
int n_runs(const SynthSpec& spec);

/// The 64 channel labels of the target dataset's montage, in file order.
const std::vector<std::string>& electrode_labels();

/// One synthetic run (1-based subject and run), deterministic in
/// (spec.seed, subject, run) alone.
edf::Recording generate_run(const SynthSpec& spec, int subject, int run);

/// Full dataset pushed through the standard preprocessing and
/// featurization pipeline, one run at a time. No subjects are excluded.
features::FeatureStore build_store(const SynthSpec& spec,
                                   const pipeline::FeaturizeOptions& opt,
                                   const dsp::FilterSpec& filter = {},
                                   int jobs = 1);

}  // namespace eegmc::synth
