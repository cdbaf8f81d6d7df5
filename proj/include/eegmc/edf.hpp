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

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace eegmc::edf {

struct EdfHeader {
  std::string version;       // 8-char ASCII tag, "0" for EDF/EDF+
  std::string subject_id;    // local patient identification
  std::string recording_id;  // local recording identification
  std::string start_date;    // dd.mm.yy
  std::string start_time;    // hh.mm.ss
  std::string reserved;      // "EDF+C"/"EDF+D" for EDF+
  std::int64_t header_bytes = 0;
  std::int64_t n_records = 0;  // -1 = unknown per the format
  double record_duration = 0.0;
  int n_signals = 0;
};

struct SignalSpec {
  std::string label;
  std::string transducer;
  std::string physical_dim;
  double physical_min = 0.0;
  double physical_max = 0.0;
  int digital_min = 0;
  int digital_max = 0;
  std::string prefiltering;
  int samples_per_record = 0;
};

/// Time-stamped annotation; the movement dataset uses labels T0 (rest),
/// T1 (left hand) and T2 (right hand).
struct Annotation {
  double onset = 0.0;     // seconds from recording start
  double duration = 0.0;  // seconds
  std::string label;
};

/// A parsed recording: calibrated per-channel signals in physical units
/// plus the decoded annotation track. Immutable after construction; safe
/// to share read-only across threads.
struct Recording {
  EdfHeader header;
  std::vector<SignalSpec> signal_specs;     // data channels only
  std::vector<std::string> channel_labels;  // data channels only
  double fs = 0.0;
  std::vector<std::vector<double>> samples;  // [channel][sample], physical units
  std::vector<Annotation> annotations;
  int subject = 0;  // 1-based id, 0 when unknown
  int run = 0;      // acquisition run number, 0 when unknown

  std::size_t n_samples() const {
    return samples.empty() ? 0 : samples.front().size();
  }
};

enum class Side { Left, Right };

inline const char* to_string(Side s) { return s == Side::Left ? "L" : "R"; }

/// One movement trial: the raw multi-channel window from the annotation
/// onset up to the next annotation (or end of file).
struct Trial {
  int subject = 0;
  Side kind = Side::Left;
  std::int64_t onset_sample = 0;
  std::vector<std::vector<double>> data;  // [channel][sample]
};

/// Parses an EDF/EDF+ byte stream. Digital samples are mapped to physical
/// units with the header calibration; an "EDF Annotations" channel is
/// decoded into the annotation list and excluded from the data channels.
/// Errors carry the byte offset that made the file unreadable.
Recording parse_edf(std::span<const std::byte> bytes);

/// Reads and parses a file; fills Recording::subject/run from names shaped
/// like S001R03.edf when present.
Recording load_edf_file(const std::string& path);

/// Subjects the study drops for low signal-to-noise ratio.
const std::set<int>& default_excluded_subjects();

/// One trial per T1/T2 annotation; T0 spans are ignored and excluded
/// subjects yield an empty list. Throws on labels outside {T0,T1,T2}.
std::vector<Trial> extract_trials(const Recording& rec,
                                  const std::set<int>& excluded =
                                      default_excluded_subjects());

}  // namespace eegmc::edf
