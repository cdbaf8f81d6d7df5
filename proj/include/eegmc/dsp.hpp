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

#include <complex>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace eegmc::edf {
struct Recording;
}

namespace eegmc::dsp {

/// Symmetric left/right electrode pairing over a 10-10 label set.
/// `pairs` is ordered alphabetically by left label; `discarded` holds the
/// midline ('z'-suffixed) labels that have no mirror partner.
struct Montage {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<std::string> discarded;
};

/// Strips EDF padding (trailing '.' and whitespace) from an electrode label.
std::string canonical_label(std::string_view label);

/// Builds the 27-pair differential montage from 64 channel labels.
/// Left labels carry odd suffixes, right labels the matching even suffix,
/// midline labels end in 'z' and are discarded. Throws if the label set
/// does not partition into 27 mirror pairs plus 10 midline labels.
Montage make_montage(const std::vector<std::string>& labels);

/// One differential channel: left minus right, sample-wise.
struct DiffSignal {
  std::pair<std::string, std::string> pair;
  std::vector<double> samples;
  double fs = 0.0;
};

std::vector<DiffSignal> apply_montage(const edf::Recording& rec,
                                      const Montage& montage);

/// Filter configuration (CLI flags --notch-hz, --band-lo, --band-hi,
/// --filter-order map onto these fields).
struct FilterSpec {
  double notch_hz = 50.0;
  double notch_q = 30.0;
  double band_lo = 0.5;
  double band_hi = 70.0;
  int order = 4;
};

/// Second-order section with a0 normalized to 1.
struct Sos {
  double b0, b1, b2;
  double a1, a2;
};

/// RBJ biquad notch at f0 with quality factor q. Unity gain at DC and
/// Nyquist, zero on the unit circle at f0.
std::vector<Sos> design_notch(double f0, double q, double fs);

/// Butterworth band-pass via the bilinear transform with prewarped edges.
/// `order` is the analog prototype order, so the digital filter has
/// 2*order poles.
std::vector<Sos> design_bandpass(int order, double lo, double hi, double fs);

/// Complex frequency response of the cascade at frequency f (Hz).
std::complex<double> frequency_response(std::span<const Sos> sos, double f,
                                        double fs);

/// Largest pole magnitude of the cascade; bounds how slowly transients decay.
double max_pole_radius(std::span<const Sos> sos);

/// Zero-phase filtering: forward pass, backward pass, transients suppressed
/// by odd-reflection padding sized to the slowest pole plus steady-state
/// initial conditions per section.
std::vector<double> filtfilt(std::span<const Sos> sos,
                             std::span<const double> x);

DiffSignal notch_filter(const DiffSignal& x, const FilterSpec& spec);
DiffSignal bandpass_filter(const DiffSignal& x, const FilterSpec& spec);

/// Maps samples onto [0,1] via (x - min)/(max - min). A constant signal maps
/// to all 0.5.
std::vector<double> minmax_normalize(std::span<const double> x);
DiffSignal minmax_normalize(const DiffSignal& x);

}  // namespace eegmc::dsp
