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

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "eegmc/edf.hpp"

namespace eegmc::features {

/// Segmentation layout: a trial segment is split into `n_steps` windows
/// with fractional `overlap` between neighbours. With the default 7 steps
/// at 50% overlap the step window is segment_len/4 and the hop is half a
/// window, so 2 s at 160 Hz gives 7 windows of 80 samples, hop 40.
struct SegmentSpec {
  double segment_len = 2.0;  // seconds
  int n_steps = 7;
  double overlap = 0.5;
  double fs = 0.0;  // Hz
};

/// Samples per step window. Throws if the layout does not land on whole
/// samples (window and hop must both be integers).
std::size_t window_samples(const SegmentSpec& spec);

/// Samples between consecutive window starts.
std::size_t hop_samples(const SegmentSpec& spec);

/// One time step: equal-length sample runs, one per montage channel.
struct StepWindow {
  std::vector<std::vector<double>> channels;  // [channel][sample]

  std::size_t n_samples() const {
    return channels.empty() ? 0 : channels.front().size();
  }
};

inline constexpr int kFeaturesPerChannel = 11;
inline constexpr int kMontageChannels = 27;
inline constexpr int kFeatureDim = kMontageChannels * kFeaturesPerChannel;
inline constexpr int kTimeFeatures = 7;
inline constexpr int kBandFeatures = 4;

/// Per-channel feature order. The flat layout is channel-major: feature j
/// of channel c lives at index c*11 + j. This ordering is a frozen file
/// and model contract; never reorder.
inline constexpr std::array<const char*, kFeaturesPerChannel> kFeatureNames = {
    "mean",         "variance",     "skewness",    "kurtosis",
    "zero_crossings", "abs_area",   "peak2peak",   "relpow_delta",
    "relpow_theta", "relpow_alpha", "relpow_beta",
};

/// 297 values in the frozen ordering above.
using FeatureVector = std::vector<double>;

/// Seven feature vectors (one per step) plus the trial identity.
struct FeatureTensor {
  std::vector<FeatureVector> steps;  // n_steps rows of kFeatureDim
  edf::Side label = edf::Side::Left;
  int subject = 0;
  int trial = 0;
  double offset_seconds = 0.0;  // segment start relative to trial onset
};

/// Cuts overlapping step windows out of per-channel signals, starting at
/// `start_sample`. All channels must share one length; throws when the
/// signal is too short for the requested layout.
std::vector<StepWindow> segment(
    const std::vector<std::vector<double>>& channels, const SegmentSpec& spec,
    std::size_t start_sample = 0);

/// Segments a trial's data from its onset (the trial window starts there).
std::vector<StepWindow> segment(const edf::Trial& trial,
                                const SegmentSpec& spec);

/// The seven time-domain features of one channel window, in feature order:
/// mean, variance (1/N), skewness, excess kurtosis, zero crossings,
/// absolute area (composite Simpson over |x| at spacing 1/fs, trapezoid on
/// a final odd interval) and peak-to-peak. A constant window takes
/// skewness = kurtosis = 0 by convention. Requires N >= 4.
std::array<double, kTimeFeatures> time_features(std::span<const double> x,
                                                double fs);

/// One-sided periodogram: |DFT(x)|^2 / (N*fs) with interior bins doubled.
/// Bin k sits at k*df. Satisfies Parseval: sum(power)*df = mean square.
struct Psd {
  std::vector<double> power;  // bins 0..floor(N/2)
  double df = 0.0;            // bin spacing fs/N, Hz
};

Psd psd(std::span<const double> x, double fs);

/// Denominator for relative band power: total power in the 0.5-70 Hz
/// passband, or the sum of the four bands themselves.
enum class BandDivisor { TotalPassband, FourBandSum };

inline constexpr std::array<std::array<double, 2>, kBandFeatures> kBands = {{
    {0.5, 4.0},   // delta
    {4.0, 8.0},   // theta
    {8.0, 12.0},  // alpha
    {12.0, 30.0}, // beta
}};
inline constexpr std::array<double, 2> kPassband = {0.5, 70.0};

/// Relative delta/theta/alpha/beta power. Bins belong to a band when the
/// bin-centre frequency falls in [lo, hi). Zero total power maps every
/// band to 0 by convention.
std::array<double, kBandFeatures> band_powers(
    const Psd& p, BandDivisor divisor = BandDivisor::TotalPassband);

/// All 297 features of one step window; requires exactly 27 channels of
/// finite samples.
FeatureVector featurize_window(
    const StepWindow& window, double fs,
    BandDivisor divisor = BandDivisor::TotalPassband);

/// Feature rows for a full segment; the caller fills in trial identity.
FeatureTensor featurize_segment(
    const std::vector<StepWindow>& windows, double fs,
    BandDivisor divisor = BandDivisor::TotalPassband);

}  // namespace eegmc::features
