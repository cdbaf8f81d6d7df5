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

#include "eegmc/dsp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "eegmc/edf.hpp"

namespace eegmc::dsp {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(),
                     [](double v) { return std::isfinite(v); });
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return out;
}

}  // namespace

std::string canonical_label(std::string_view label) {
  std::size_t end = label.size();
  while (end > 0 && (label[end - 1] == '.' || std::isspace(
                         static_cast<unsigned char>(label[end - 1])))) {
    --end;
  }
  std::size_t begin = 0;
  while (begin < end && std::isspace(static_cast<unsigned char>(label[begin]))) {
    ++begin;
  }
  return std::string(label.substr(begin, end - begin));
}

Montage make_montage(const std::vector<std::string>& labels) {
  if (labels.size() != 64) {
    throw std::invalid_argument("montage expects 64 channel labels, got " +
                                std::to_string(labels.size()));
  }

  struct Entry {
    std::string canonical;
    std::string prefix;  // uppercased site prefix
    long number = 0;     // 0 = midline
  };

  std::vector<Entry> entries;
  entries.reserve(labels.size());
  std::vector<std::string> midline;
  for (const auto& raw : labels) {
    Entry e;
    e.canonical = canonical_label(raw);
    if (e.canonical.empty()) {
      throw std::invalid_argument("empty channel label");
    }
    std::size_t digits = 0;
    while (digits < e.canonical.size() &&
           std::isdigit(static_cast<unsigned char>(
               e.canonical[e.canonical.size() - 1 - digits]))) {
      ++digits;
    }
    if (digits == 0) {
      const char last = static_cast<char>(
          std::tolower(static_cast<unsigned char>(e.canonical.back())));
      if (last != 'z') {
        throw std::invalid_argument("label '" + e.canonical +
                                    "' is neither numbered nor midline");
      }
      midline.push_back(e.canonical);
      continue;
    }
    e.prefix = upper(std::string_view(e.canonical).substr(
        0, e.canonical.size() - digits));
    e.number = std::stol(e.canonical.substr(e.canonical.size() - digits));
    entries.push_back(std::move(e));
  }

  // Mirror rule: odd n on the left pairs with n+1 on the right.
  std::map<std::pair<std::string, long>, std::string> by_site;
  for (const auto& e : entries) {
    auto key = std::make_pair(e.prefix, e.number);
    if (!by_site.emplace(key, e.canonical).second) {
      throw std::invalid_argument("duplicate channel label '" + e.canonical +
                                  "'");
    }
  }

  Montage m;
  for (const auto& e : entries) {
    if (e.number % 2 == 0) continue;  // right-side labels are picked up via their partner
    auto partner = by_site.find({e.prefix, e.number + 1});
    if (partner == by_site.end()) {
      throw std::invalid_argument("label '" + e.canonical +
                                  "' has no mirrored right-side partner");
    }
    m.pairs.emplace_back(e.canonical, partner->second);
  }

  if (m.pairs.size() * 2 + midline.size() != labels.size()) {
    throw std::invalid_argument(
        "labels do not partition into mirror pairs plus midline");
  }
  if (m.pairs.size() != 27 || midline.size() != 10) {
    throw std::invalid_argument(
        "expected 27 mirror pairs and 10 midline labels, got " +
        std::to_string(m.pairs.size()) + " and " +
        std::to_string(midline.size()));
  }

  std::sort(m.pairs.begin(), m.pairs.end(),
            [](const auto& a, const auto& b) {
              return upper(a.first) < upper(b.first);
            });
  std::sort(midline.begin(), midline.end(),
            [](const auto& a, const auto& b) { return upper(a) < upper(b); });
  m.discarded = std::move(midline);
  return m;
}

std::vector<DiffSignal> apply_montage(const edf::Recording& rec,
                                      const Montage& montage) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < rec.channel_labels.size(); ++i) {
    index[upper(canonical_label(rec.channel_labels[i]))] = i;
  }
  std::vector<DiffSignal> out;
  out.reserve(montage.pairs.size());
  for (const auto& [left, right] : montage.pairs) {
    auto li = index.find(upper(left));
    auto ri = index.find(upper(right));
    if (li == index.end() || ri == index.end()) {
      throw std::invalid_argument("montage label missing from recording: " +
                                  (li == index.end() ? left : right));
    }
    const auto& l = rec.samples[li->second];
    const auto& r = rec.samples[ri->second];
    DiffSignal d;
    d.pair = {left, right};
    d.fs = rec.fs;
    d.samples.resize(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) d.samples[i] = l[i] - r[i];
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Sos> design_notch(double f0, double q, double fs) {
  if (!(f0 > 0.0) || !(f0 < fs / 2.0)) {
    throw std::invalid_argument("notch frequency must lie in (0, fs/2)");
  }
  if (!(q > 0.0)) throw std::invalid_argument("notch Q must be positive");
  const double w0 = 2.0 * kPi * f0 / fs;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c = std::cos(w0);
  const double a0 = 1.0 + alpha;
  Sos s{};
  s.b0 = 1.0 / a0;
  s.b1 = -2.0 * c / a0;
  s.b2 = 1.0 / a0;
  s.a1 = -2.0 * c / a0;
  s.a2 = (1.0 - alpha) / a0;
  return {s};
}

std::vector<Sos> design_bandpass(int order, double lo, double hi, double fs) {
  if (order < 1 || order > 12) {
    throw std::invalid_argument("band-pass order must be in [1, 12]");
  }
  if (!(lo > 0.0) || !(lo < hi) || !(hi < fs / 2.0)) {
    throw std::invalid_argument("band edges must satisfy 0 < lo < hi < fs/2");
  }
  using cd = std::complex<double>;
  const double fs2 = 2.0 * fs;
  // Prewarped analog edges for the bilinear transform.
  const double w1 = fs2 * std::tan(kPi * lo / fs);
  const double w2 = fs2 * std::tan(kPi * hi / fs);
  const double w0 = std::sqrt(w1 * w2);
  const double bw = w2 - w1;

  // Analog poles: Butterworth prototype mapped through the band-pass
  // substitution S -> (s^2 + w0^2)/(bw*s), then bilinear to z.
  std::vector<cd> zpoles;
  for (int k = 1; k <= order; ++k) {
    const double theta = kPi * (2.0 * k + order - 1.0) / (2.0 * order);
    const cd proto = std::polar(1.0, theta);
    const cd pb = proto * bw;
    const cd disc = std::sqrt(pb * pb - 4.0 * w0 * w0);
    for (const cd s : {0.5 * (pb + disc), 0.5 * (pb - disc)}) {
      zpoles.push_back((fs2 + s) / (fs2 - s));
    }
  }

  // Group poles into conjugate pairs (real poles pair with each other).
  std::vector<cd> complex_poles;
  std::vector<double> real_poles;
  for (const cd& p : zpoles) {
    if (std::abs(p.imag()) < 1e-12) {
      real_poles.push_back(p.real());
    } else if (p.imag() > 0.0) {
      complex_poles.push_back(p);
    }
  }
  std::sort(complex_poles.begin(), complex_poles.end(),
            [](const cd& a, const cd& b) {
              return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b)
                                                : a.real() < b.real();
            });
  std::sort(real_poles.begin(), real_poles.end());

  std::vector<Sos> sos;
  for (const cd& p : complex_poles) {
    Sos s{};
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;  // zeros at z = +1 and z = -1
    s.a1 = -2.0 * p.real();
    s.a2 = std::norm(p);
    sos.push_back(s);
  }
  for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2) {
    Sos s{};
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
    s.a1 = -(real_poles[i] + real_poles[i + 1]);
    s.a2 = real_poles[i] * real_poles[i + 1];
    sos.push_back(s);
  }
  if (sos.size() != static_cast<std::size_t>(order)) {
    throw std::runtime_error("band-pass design lost pole pairs");
  }

  // Normalize to unit gain at the (warped) center frequency.
  const double fc = std::atan(w0 / fs2) * fs / kPi;
  const double g = std::abs(frequency_response(sos, fc, fs));
  if (!(g > 0.0)) throw std::runtime_error("degenerate band-pass gain");
  const double k = std::pow(1.0 / g, 1.0 / static_cast<double>(sos.size()));
  for (auto& s : sos) {
    s.b0 *= k;
    s.b1 *= k;
    s.b2 *= k;
  }
  return sos;
}

std::complex<double> frequency_response(std::span<const Sos> sos, double f,
                                        double fs) {
  using cd = std::complex<double>;
  const cd z = std::polar(1.0, -2.0 * kPi * f / fs);  // z^-1
  cd h{1.0, 0.0};
  for (const auto& s : sos) {
    h *= (s.b0 + s.b1 * z + s.b2 * z * z) /
         (1.0 + s.a1 * z + s.a2 * z * z);
  }
  return h;
}

double max_pole_radius(std::span<const Sos> sos) {
  double r = 0.0;
  for (const auto& s : sos) {
    const std::complex<double> disc =
        std::sqrt(std::complex<double>(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    r = std::max(r, std::abs((-s.a1 + disc) / 2.0));
    r = std::max(r, std::abs((-s.a1 - disc) / 2.0));
  }
  return r;
}

namespace {

// Direct-form-II-transposed run of one section from an explicit initial
// state; writes the output over the input buffer. States this small carry
// no signal; flushing them keeps decayed tails out of denormal range,
// where arithmetic is orders of magnitude slower.
constexpr double kStateFloor = 1e-290;

void run_df2t(const Sos& s, std::vector<double>& x, double z1, double z2) {
  for (double& v : x) {
    const double y = s.b0 * v + z1;
    z1 = s.b1 * v - s.a1 * y + z2;
    z2 = s.b2 * v - s.a2 * y;
    if (std::abs(z1) < kStateFloor) z1 = 0.0;
    if (std::abs(z2) < kStateFloor) z2 = 0.0;
    v = y;
  }
}

std::vector<double> causal(const Sos& s, std::vector<double> x,
                           double z1 = 0.0, double z2 = 0.0) {
  run_df2t(s, x, z1, z2);
  return x;
}

std::vector<double> anticausal(const Sos& s, std::vector<double> x,
                               double z1 = 0.0, double z2 = 0.0) {
  std::reverse(x.begin(), x.end());
  run_df2t(s, x, z1, z2);
  std::reverse(x.begin(), x.end());
  return x;
}

std::vector<double> reversed(std::vector<double> x) {
  std::reverse(x.begin(), x.end());
  return x;
}

// Zero-input response of the section from a unit initial state.
std::vector<double> state_response(const Sos& s, double z1, double z2,
                                   std::size_t n) {
  std::vector<double> x(n, 0.0);
  run_df2t(s, x, z1, z2);
  return x;
}

// Zero-phase run of one section with consistent initial states: pick a
// forward state x0 and a backward state x1 so that forward-then-backward
// equals backward-then-forward in the least-squares sense. The shared
// output carries no initialization transient, only the signal's own
// switch-on content, and the whole map stays linear in the input.
std::vector<double> zero_phase_section(const Sos& s,
                                       const std::vector<double>& x) {
  const std::size_t n = x.size();
  const std::vector<double> lx = causal(s, x);
  const std::vector<double> alx = anticausal(s, lx);  // naive fwd-bwd
  const std::vector<double> ax = anticausal(s, x);
  const std::vector<double> lax = causal(s, ax);      // naive bwd-fwd

  const std::vector<double> m1 = state_response(s, 1.0, 0.0, n);
  const std::vector<double> m2 = state_response(s, 0.0, 1.0, n);
  const std::vector<double> am1 = anticausal(s, m1);
  const std::vector<double> am2 = anticausal(s, m2);
  const std::vector<double> rm1 = reversed(m1);
  const std::vector<double> rm2 = reversed(m2);
  const std::vector<double> lrm1 = causal(s, rm1);
  const std::vector<double> lrm2 = causal(s, rm2);

  // fb(x0, x1) - bf(x0, x1) = (A M - M) x0 + (R M - L R M) x1 + alx - lax,
  // with L causal, A anticausal, R reversal, M the state-response columns.
  Eigen::MatrixXd c(n, 4);
  Eigen::VectorXd d(n);
  for (std::size_t i = 0; i < n; ++i) {
    c(i, 0) = am1[i] - m1[i];
    c(i, 1) = am2[i] - m2[i];
    c(i, 2) = rm1[i] - lrm1[i];
    c(i, 3) = rm2[i] - lrm2[i];
    d(i) = lax[i] - alx[i];
  }
  const Eigen::VectorXd u = c.colPivHouseholderQr().solve(d);

  // Optimal forward-backward output: alx + A(M x0) + R(M) x1.
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = alx[i] + u(0) * am1[i] + u(1) * am2[i] + u(2) * rm1[i] +
           u(3) * rm2[i];
  }
  return y;
}

}  // namespace

std::vector<double> filtfilt(std::span<const Sos> sos,
                             std::span<const double> x) {
  if (x.size() < 2) {
    throw std::invalid_argument("filtfilt needs at least two samples");
  }
  if (!is_finite(x)) {
    throw std::invalid_argument("filtfilt input contains non-finite values");
  }
  std::vector<double> y(x.begin(), x.end());
  for (const auto& s : sos) y = zero_phase_section(s, y);
  return y;
}

DiffSignal notch_filter(const DiffSignal& x, const FilterSpec& spec) {
  if (!(x.fs > 0.0)) throw std::invalid_argument("sampling rate unknown");
  const auto sos = design_notch(spec.notch_hz, spec.notch_q, x.fs);
  DiffSignal out = x;
  out.samples = filtfilt(sos, x.samples);
  return out;
}

DiffSignal bandpass_filter(const DiffSignal& x, const FilterSpec& spec) {
  if (!(x.fs > 0.0)) throw std::invalid_argument("sampling rate unknown");
  const auto sos = design_bandpass(spec.order, spec.band_lo, spec.band_hi, x.fs);
  DiffSignal out = x;
  out.samples = filtfilt(sos, x.samples);
  return out;
}

std::vector<double> minmax_normalize(std::span<const double> x) {
  if (x.size() < 2) {
    throw std::invalid_argument("normalization needs at least two samples");
  }
  const auto [mn_it, mx_it] = std::minmax_element(x.begin(), x.end());
  const double mn = *mn_it, mx = *mx_it;
  std::vector<double> out(x.size());
  if (mx == mn) {
    std::fill(out.begin(), out.end(), 0.5);
    return out;
  }
  const double scale = 1.0 / (mx - mn);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mn) * scale;
  return out;
}

DiffSignal minmax_normalize(const DiffSignal& x) {
  DiffSignal out = x;
  out.samples = minmax_normalize(std::span<const double>(x.samples));
  return out;
}

}  // namespace eegmc::dsp
