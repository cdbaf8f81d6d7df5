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

#include "eegmc/features.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "eegmc/log.hpp"

namespace eegmc::features {

namespace {

// Silences repeats; constant windows are legal but worth one notice.
std::atomic<bool> g_constant_window_noted{false};

void note_constant_window() {
  if (!g_constant_window_noted.exchange(true)) {
    logln::warn("features",
                "constant window: skewness=0 kurtosis=0 by convention "
                "(further notices suppressed)");
  }
}

void check_spec(const SegmentSpec& spec) {
  if (!(spec.fs > 0.0) || !std::isfinite(spec.fs)) {
    throw std::invalid_argument("segment: fs must be positive");
  }
  if (!(spec.segment_len > 0.0) || !std::isfinite(spec.segment_len)) {
    throw std::invalid_argument("segment: segment_len must be positive");
  }
  if (spec.n_steps < 1) {
    throw std::invalid_argument("segment: n_steps must be at least 1");
  }
  if (!(spec.overlap >= 0.0 && spec.overlap < 1.0)) {
    throw std::invalid_argument("segment: overlap must lie in [0, 1)");
  }
}

// Total samples spanned by the n_steps windows; equals segment_len*fs.
std::size_t segment_samples(const SegmentSpec& spec) {
  const double total = spec.segment_len * spec.fs;
  const double rounded = std::round(total);
  if (std::abs(total - rounded) > 1e-9 || rounded < 1.0) {
    throw std::invalid_argument(
        "segment: segment_len*fs must be a whole sample count");
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace

std::size_t window_samples(const SegmentSpec& spec) {
  check_spec(spec);
  const std::size_t total = segment_samples(spec);
  // total = w*(1 + (n_steps-1)*(1-overlap)); 7 steps at 50% give w = total/4.
  const double denom = 1.0 + (spec.n_steps - 1) * (1.0 - spec.overlap);
  const double w = static_cast<double>(total) / denom;
  const double w_rounded = std::round(w);
  if (std::abs(w - w_rounded) > 1e-9 || w_rounded < 1.0) {
    throw std::invalid_argument(
        "segment: layout does not produce whole-sample windows");
  }
  const double hop = w_rounded * (1.0 - spec.overlap);
  if (std::abs(hop - std::round(hop)) > 1e-9 || std::round(hop) < 1.0) {
    throw std::invalid_argument(
        "segment: layout does not produce a whole-sample hop");
  }
  return static_cast<std::size_t>(w_rounded);
}

std::size_t hop_samples(const SegmentSpec& spec) {
  const std::size_t w = window_samples(spec);
  return static_cast<std::size_t>(
      std::round(static_cast<double>(w) * (1.0 - spec.overlap)));
}

std::vector<StepWindow> segment(
    const std::vector<std::vector<double>>& channels, const SegmentSpec& spec,
    std::size_t start_sample) {
  if (channels.empty()) {
    throw std::invalid_argument("segment: no channels");
  }
  const std::size_t n = channels.front().size();
  for (const auto& ch : channels) {
    if (ch.size() != n) {
      throw std::invalid_argument("segment: channels differ in length");
    }
  }
  const std::size_t w = window_samples(spec);
  const std::size_t hop = hop_samples(spec);
  const std::size_t span = w + (spec.n_steps - 1) * hop;
  if (start_sample > n || n - start_sample < span) {
    throw std::invalid_argument(
        "segment: trial too short: need " + std::to_string(span) +
        " samples from offset " + std::to_string(start_sample) + ", have " +
        std::to_string(n));
  }
  std::vector<StepWindow> out(static_cast<std::size_t>(spec.n_steps));
  for (int s = 0; s < spec.n_steps; ++s) {
    const std::size_t begin = start_sample + static_cast<std::size_t>(s) * hop;
    auto& win = out[static_cast<std::size_t>(s)];
    win.channels.reserve(channels.size());
    for (const auto& ch : channels) {
      win.channels.emplace_back(ch.begin() + static_cast<std::ptrdiff_t>(begin),
                                ch.begin() +
                                    static_cast<std::ptrdiff_t>(begin + w));
    }
  }
  return out;
}

std::vector<StepWindow> segment(const edf::Trial& trial,
                                const SegmentSpec& spec) {
  return segment(trial.data, spec, 0);
}

std::array<double, kTimeFeatures> time_features(std::span<const double> x,
                                                double fs) {
  const std::size_t n = x.size();
  if (n < 4) {
    throw std::invalid_argument("time_features: need at least 4 samples");
  }
  if (!(fs > 0.0) || !std::isfinite(fs)) {
    throw std::invalid_argument("time_features: fs must be positive");
  }

  double sum = 0.0;
  double lo = x[0];
  double hi = x[0];
  for (const double v : x) {
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double nd = static_cast<double>(n);
  const double mean = sum / nd;

  double m2 = 0.0;  // sum of squared deviations
  double m3 = 0.0;
  double m4 = 0.0;
  for (const double v : x) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double variance = m2 / nd;

  double skewness = 0.0;
  double kurtosis = 0.0;
  if (hi == lo) {
    note_constant_window();
  } else {
    // Mixed normalisation: 1/N third moment over the 1/(N-1) second moment.
    const double denom_skew = std::pow(m2 / (nd - 1.0), 1.5);
    skewness = (m3 / nd) / denom_skew;
    kurtosis = (m4 / nd) / (variance * variance) - 3.0;
  }

  double zero_crossings = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    if (x[i] * x[i - 1] < 0.0) {
      zero_crossings += 1.0;
    }
  }

  // Composite Simpson over |x| at spacing 1/fs; a leftover odd interval is
  // closed with one trapezoid.
  const double h = 1.0 / fs;
  double abs_area = 0.0;
  std::size_t i = 0;
  for (; i + 2 < n; i += 2) {
    abs_area += (h / 3.0) * (std::abs(x[i]) + 4.0 * std::abs(x[i + 1]) +
                             std::abs(x[i + 2]));
  }
  if (i + 1 < n) {
    abs_area += (h / 2.0) * (std::abs(x[i]) + std::abs(x[i + 1]));
  }

  return {mean, variance, skewness, kurtosis, zero_crossings, abs_area,
          hi - lo};
}

Psd psd(std::span<const double> x, double fs) {
  const std::size_t n = x.size();
  if (n < 8) {
    throw std::invalid_argument("psd: need at least 8 samples");
  }
  if (!(fs > 0.0) || !std::isfinite(fs)) {
    throw std::invalid_argument("psd: fs must be positive");
  }
  const std::size_t n_bins = n / 2 + 1;
  Psd out;
  out.df = fs / static_cast<double>(n);
  out.power.resize(n_bins);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t k = 0; k < n_bins; ++k) {
    double re = 0.0;
    double im = 0.0;
    const double wk = step * static_cast<double>(k);
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = wk * static_cast<double>(t);
      re += x[t] * std::cos(ang);
      im -= x[t] * std::sin(ang);
    }
    double p = (re * re + im * im) / (static_cast<double>(n) * fs);
    const bool interior = k != 0 && !(n % 2 == 0 && k == n / 2);
    if (interior) {
      p *= 2.0;
    }
    out.power[k] = p;
  }
  return out;
}

std::array<double, kBandFeatures> band_powers(const Psd& p,
                                              BandDivisor divisor) {
  std::array<double, kBandFeatures> absolute{};
  double passband = 0.0;
  for (std::size_t k = 0; k < p.power.size(); ++k) {
    const double f = static_cast<double>(k) * p.df;
    if (f >= kPassband[0] && f < kPassband[1]) {
      passband += p.power[k];
    }
    for (int b = 0; b < kBandFeatures; ++b) {
      if (f >= kBands[static_cast<std::size_t>(b)][0] &&
          f < kBands[static_cast<std::size_t>(b)][1]) {
        absolute[static_cast<std::size_t>(b)] += p.power[k];
      }
    }
  }
  double total = passband;
  if (divisor == BandDivisor::FourBandSum) {
    total = absolute[0] + absolute[1] + absolute[2] + absolute[3];
  }
  std::array<double, kBandFeatures> rel{};
  if (total > 0.0) {
    for (int b = 0; b < kBandFeatures; ++b) {
      rel[static_cast<std::size_t>(b)] =
          absolute[static_cast<std::size_t>(b)] / total;
    }
  }
  return rel;
}

FeatureVector featurize_window(const StepWindow& window, double fs,
                               BandDivisor divisor) {
  if (window.channels.size() != kMontageChannels) {
    throw std::invalid_argument(
        "featurize_window: expected " + std::to_string(kMontageChannels) +
        " channels, got " + std::to_string(window.channels.size()));
  }
  FeatureVector out(kFeatureDim);
  for (int c = 0; c < kMontageChannels; ++c) {
    const auto& ch = window.channels[static_cast<std::size_t>(c)];
    for (const double v : ch) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument(
            "featurize_window: non-finite sample in channel " +
            std::to_string(c));
      }
    }
    const auto tf = time_features(ch, fs);
    const auto rel = band_powers(psd(ch, fs), divisor);
    double* dst = out.data() + c * kFeaturesPerChannel;
    for (int j = 0; j < kTimeFeatures; ++j) {
      dst[j] = tf[static_cast<std::size_t>(j)];
    }
    for (int b = 0; b < kBandFeatures; ++b) {
      dst[kTimeFeatures + b] = rel[static_cast<std::size_t>(b)];
    }
  }
  return out;
}

FeatureTensor featurize_segment(const std::vector<StepWindow>& windows,
                                double fs, BandDivisor divisor) {
  FeatureTensor t;
  t.steps.reserve(windows.size());
  for (const auto& w : windows) {
    t.steps.push_back(featurize_window(w, fs, divisor));
  }
  return t;
}

}  // namespace eegmc::features
