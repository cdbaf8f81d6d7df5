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

#ifndef EEGMC_TESTS_HELPERS_HPP_
#define EEGMC_TESTS_HELPERS_HPP_

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace testutil {

// The 64 electrode labels of the movement dataset header, in file order.
inline std::vector<std::string> dataset_labels() {
  return {
      "Fc5.", "Fc3.", "Fc1.", "Fcz.", "Fc2.", "Fc4.", "Fc6.", "C5..",
      "C3..", "C1..", "Cz..", "C2..", "C4..", "C6..", "Cp5.", "Cp3.",
      "Cp1.", "Cpz.", "Cp2.", "Cp4.", "Cp6.", "Fp1.", "Fpz.", "Fp2.",
      "Af7.", "Af3.", "Afz.", "Af4.", "Af8.", "F7..", "F5..", "F3..",
      "F1..", "Fz..", "F2..", "F4..", "F6..", "F8..", "Ft7.", "Ft8.",
      "T7..", "T8..", "T9..", "T10.", "Tp7.", "Tp8.", "P7..", "P5..",
      "P3..", "P1..", "Pz..", "P2..", "P4..", "P6..", "P8..", "Po7.",
      "Po3.", "Poz.", "Po4.", "Po8.", "O1..", "Oz..", "O2..", "Iz.."};
}

struct FixtureSignal {
  std::string label;
  double physical_min = -100.0;
  double physical_max = 100.0;
  int digital_min = -1000;
  int digital_max = 1000;
  int samples_per_record = 16;
  std::vector<std::int16_t> digital;  // n_records * samples_per_record values
};

inline void append_field(std::vector<std::byte>& out, const std::string& text,
                         std::size_t width) {
  if (text.size() > width) {
    throw std::runtime_error("fixture field '" + text + "' exceeds width " +
                             std::to_string(width));
  }
  for (char c : text) out.push_back(static_cast<std::byte>(c));
  for (std::size_t i = text.size(); i < width; ++i) {
    out.push_back(static_cast<std::byte>(' '));
  }
}

inline std::string num_field(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// Assembles a small EDF+ byte stream: `signals` data channels plus one
// trailing annotation channel. `tals[r]` is the raw annotation text for
// record r (zero-padded to the channel width).
inline std::vector<std::byte> make_edf(
    const std::vector<FixtureSignal>& signals, int n_records,
    double record_duration, const std::vector<std::string>& tals,
    int annotation_words = 32) {
  const int ns = static_cast<int>(signals.size()) + 1;
  std::vector<std::byte> out;
  append_field(out, "0", 8);
  append_field(out, "X X X X", 80);
  append_field(out, "Startdate 01-JAN-2026", 80);
  append_field(out, "01.01.26", 8);
  append_field(out, "00.00.00", 8);
  append_field(out, std::to_string(256 * (ns + 1)), 8);
  append_field(out, "EDF+C", 44);
  append_field(out, std::to_string(n_records), 8);
  append_field(out, num_field(record_duration), 8);
  append_field(out, std::to_string(ns), 4);

  for (const auto& s : signals) append_field(out, s.label, 16);
  append_field(out, "EDF Annotations", 16);
  for (int i = 0; i < ns; ++i) append_field(out, "", 80);
  for (const auto& s : signals) {
    (void)s;
    append_field(out, "uV", 8);
  }
  append_field(out, "", 8);
  for (const auto& s : signals) append_field(out, num_field(s.physical_min), 8);
  append_field(out, "-1", 8);
  for (const auto& s : signals) append_field(out, num_field(s.physical_max), 8);
  append_field(out, "1", 8);
  for (const auto& s : signals) append_field(out, std::to_string(s.digital_min), 8);
  append_field(out, "-32768", 8);
  for (const auto& s : signals) append_field(out, std::to_string(s.digital_max), 8);
  append_field(out, "32767", 8);
  for (int i = 0; i < ns; ++i) append_field(out, "", 80);
  for (const auto& s : signals) {
    append_field(out, std::to_string(s.samples_per_record), 8);
  }
  append_field(out, std::to_string(annotation_words), 8);
  for (int i = 0; i < ns; ++i) append_field(out, "", 32);

  for (int r = 0; r < n_records; ++r) {
    for (const auto& s : signals) {
      for (int k = 0; k < s.samples_per_record; ++k) {
        const std::size_t idx =
            static_cast<std::size_t>(r) * s.samples_per_record + k;
        const std::int16_t v = idx < s.digital.size() ? s.digital[idx] : 0;
        out.push_back(static_cast<std::byte>(v & 0xff));
        out.push_back(static_cast<std::byte>((v >> 8) & 0xff));
      }
    }
    std::string tal = r < static_cast<int>(tals.size()) ? tals[r] : "";
    if (tal.size() > static_cast<std::size_t>(annotation_words) * 2) {
      throw std::runtime_error("fixture annotation text overflows its channel");
    }
    tal.resize(static_cast<std::size_t>(annotation_words) * 2, '\0');
    for (char c : tal) out.push_back(static_cast<std::byte>(c));
  }
  return out;
}

}  // namespace testutil

#endif  // EEGMC_TESTS_HELPERS_HPP_
