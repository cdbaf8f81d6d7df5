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

#include "eegmc/synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "eegmc/log.hpp"
#include "eegmc/parallel.hpp"
#include "eegmc/rng.hpp"

namespace eegmc::synth {

namespace {

constexpr int kMovementsPerRun = 15;
constexpr double kRestSeconds = 4.2;
constexpr double kMoveSeconds = 4.1;
constexpr double kLeadSeconds = 6.0;   // quiet lead-in before the first block
constexpr double kToneHz = 10.0;       // centre of the 8-12 Hz band
constexpr double kRampSeconds = 0.15;  // raised-cosine tone on/off ramp

// Index of each designated pair's left electrode in the label list.
std::vector<std::size_t> left_channel_indices(const SynthSpec& spec,
                                              const dsp::Montage& montage) {
  std::unordered_map<std::string, std::size_t> by_label;
  const auto& labels = electrode_labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_label[dsp::canonical_label(labels[i])] = i;
  }
  std::vector<std::size_t> out;
  out.reserve(spec.pairs.size());
  for (const int p : spec.pairs) {
    out.push_back(by_label.at(montage.pairs[static_cast<std::size_t>(p)].first));
  }
  return out;
}

}  // namespace

const std::vector<std::string>& electrode_labels() {
  static const std::vector<std::string> labels = {
      "Fc5.", "Fc3.", "Fc1.", "Fcz.", "Fc2.", "Fc4.", "Fc6.", "C5..",
      "C3..", "C1..", "Cz..", "C2..", "C4..", "C6..", "Cp5.", "Cp3.",
      "Cp1.", "Cpz.", "Cp2.", "Cp4.", "Cp6.", "Fp1.", "Fpz.", "Fp2.",
      "Af7.", "Af3.", "Afz.", "Af4.", "Af8.", "F7..", "F5..", "F3..",
      "F1..", "Fz..", "F2..", "F4..", "F6..", "F8..", "Ft7.", "Ft8.",
      "T7..", "T8..", "T9..", "T10.", "Tp7.", "Tp8.", "P7..", "P5..",
      "P3..", "P1..", "Pz..", "P2..", "P4..", "P6..", "P8..", "Po7.",
      "Po3.", "Poz.", "Po4.", "Po8.", "O1..", "Oz..", "O2..", "Iz.."};
  return labels;
}

void validate(const SynthSpec& spec) {
  if (spec.n_subjects < 1) {
    throw std::invalid_argument("synth: n_subjects must be positive");
  }
  if (spec.trials_per_subject < kMovementsPerRun ||
      spec.trials_per_subject % kMovementsPerRun != 0) {
    throw std::invalid_argument(
        "synth: trials_per_subject must be a positive multiple of 15");
  }
  if (spec.fs <= 0.0) throw std::invalid_argument("synth: fs must be positive");
  if (spec.effect < 0.0 || spec.effect >= 1.0) {
    throw std::invalid_argument("synth: effect must lie in [0, 1)");
  }
  if (spec.alpha_amp < 0.0 || spec.noise < 0.0) {
    throw std::invalid_argument("synth: amplitudes must be non-negative");
  }
  if (spec.onset_delay < 0.0 || spec.onset_delay >= kMoveSeconds) {
    throw std::invalid_argument("synth: onset_delay outside the movement span");
  }
  if (spec.pairs.empty()) {
    throw std::invalid_argument("synth: need at least one designated pair");
  }
  for (const int p : spec.pairs) {
    if (p < 0 || p >= features::kMontageChannels) {
      throw std::invalid_argument("synth: pair index out of range");
    }
  }
}

int n_runs(const SynthSpec& spec) {
  return spec.trials_per_subject / kMovementsPerRun;
}

edf::Recording generate_run(const SynthSpec& spec, int subject, int run) {
  validate(spec);
  if (subject < 1 || subject > spec.n_subjects) {
    throw std::invalid_argument("synth: subject out of range");
  }
  if (run < 1 || run > n_runs(spec)) {
    throw std::invalid_argument("synth: run out of range");
  }

  const auto& labels = electrode_labels();
  const dsp::Montage montage = dsp::make_montage(labels);
  const auto tone_channels = left_channel_indices(spec, montage);

  // Quiet spans bracket the run: the zero-phase filters leave residual
  // edge transients at both ends of a recording, and the lead-in and
  // trailing rest keep them clear of every featurized trial window.
  const double block = kRestSeconds + kMoveSeconds;
  const std::size_t n_samples = static_cast<std::size_t>(std::llround(
      (kLeadSeconds + kMovementsPerRun * block + kRestSeconds) * spec.fs));

  edf::Recording rec;
  rec.header.version = "0";
  rec.header.recording_id = "synthetic";
  rec.header.n_signals = static_cast<int>(labels.size());
  rec.channel_labels = labels;
  rec.fs = spec.fs;
  rec.subject = subject;
  rec.run = run;
  rec.samples.assign(labels.size(), std::vector<double>(n_samples, 0.0));

  // Electrode noise, channel-major, from the per-(subject, run) stream.
  Rng noise_rng = Rng::stream(spec.seed, "synth-noise",
                              static_cast<std::uint64_t>(subject),
                              static_cast<std::uint64_t>(run));
  if (spec.noise > 0.0) {
    for (auto& channel : rec.samples) {
      for (auto& v : channel) v = spec.noise * noise_rng.gaussian();
    }
  }

  // Movements with their class tones; rest spans carry noise only.
  Rng phase_rng = Rng::stream(spec.seed, "synth-phase",
                              static_cast<std::uint64_t>(subject),
                              static_cast<std::uint64_t>(run));
  rec.annotations.push_back({0.0, kLeadSeconds, "T0"});
  for (int m = 0; m < kMovementsPerRun; ++m) {
    const double rest_onset = kLeadSeconds + m * block;
    const double move_onset = rest_onset + kRestSeconds;
    rec.annotations.push_back({rest_onset, kRestSeconds, "T0"});

    const bool left = (m + (run - 1)) % 2 == 0;
    rec.annotations.push_back({move_onset, kMoveSeconds, left ? "T1" : "T2"});

    const double gain =
        spec.alpha_amp * (1.0 + (left ? -spec.effect : spec.effect));
    const double t_start = move_onset + spec.onset_delay;
    const double t_stop = move_onset + kMoveSeconds;
    const std::size_t start =
        static_cast<std::size_t>(std::llround(t_start * spec.fs));
    const std::size_t stop = std::min(
        n_samples, static_cast<std::size_t>(std::llround(t_stop * spec.fs)));
    const double ramp =
        std::min(kRampSeconds, (t_stop - t_start) / 2.0);
    for (const std::size_t ch : tone_channels) {
      const double phase = phase_rng.uniform(0.0, 2.0 * std::numbers::pi);
      auto& channel = rec.samples[ch];
      for (std::size_t s = start; s < stop; ++s) {
        const double t = static_cast<double>(s) / spec.fs;
        // Raised-cosine edges keep the switch-on/off out of the filters.
        const double edge = std::min(t - t_start, t_stop - t);
        const double env =
            edge >= ramp
                ? 1.0
                : 0.5 * (1.0 - std::cos(std::numbers::pi * edge / ramp));
        channel[s] += env * gain *
                      std::sin(2.0 * std::numbers::pi * kToneHz * t + phase);
      }
    }
  }
  rec.annotations.push_back(
      {kLeadSeconds + kMovementsPerRun * block, kRestSeconds, "T0"});
  return rec;
}

features::FeatureStore build_store(const SynthSpec& spec,
                                   const pipeline::FeaturizeOptions& opt,
                                   const dsp::FilterSpec& filter, int jobs) {
  validate(spec);
  const int runs = n_runs(spec);

  struct Slot {
    std::vector<features::FeatureTensor> tensors;
  };
  std::vector<Slot> slots(
      static_cast<std::size_t>(spec.n_subjects * runs));

  const auto work = [&](std::size_t i) {
    const int subject = static_cast<int>(i) / runs + 1;
    const int run = static_cast<int>(i) % runs + 1;
    const edf::Recording rec = generate_run(spec, subject, run);
    const pipeline::Prepared prep = pipeline::preprocess(rec, filter, {});
    slots[i].tensors = pipeline::featurize_trials(prep, opt);
  };

  parallel_for(slots.size(), jobs, work);

  features::FeatureStore store;
  for (int subject = 1; subject <= spec.n_subjects; ++subject) {
    int trial_id = 0;
    for (int run = 1; run <= runs; ++run) {
      auto& slot = slots[static_cast<std::size_t>((subject - 1) * runs +
                                                  (run - 1))];
      for (auto& tensor : slot.tensors) {
        tensor.trial = trial_id++;
        store.add(tensor);
      }
    }
  }
  logln::info("synth", "store items=" + std::to_string(store.size()) +
                           " subjects=" + std::to_string(spec.n_subjects));
  return store;
}

}  // namespace eegmc::synth
