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

#include "eegmc/edf.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "eegmc/log.hpp"

namespace eegmc::edf {

namespace {

constexpr std::size_t kFixedHeaderBytes = 256;
constexpr std::size_t kPerSignalBytes = 256;

[[noreturn]] void fail_at(std::size_t offset, const std::string& what) {
  throw std::runtime_error("edf parse error at byte " + std::to_string(offset) +
                           ": " + what);
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Reads a fixed-width ASCII field and advances the offset.
std::string read_field(std::span<const std::byte> bytes, std::size_t& offset,
                       std::size_t width) {
  if (offset + width > bytes.size()) {
    fail_at(offset, "truncated header field of width " + std::to_string(width));
  }
  std::string_view raw(reinterpret_cast<const char*>(bytes.data() + offset),
                       width);
  offset += width;
  return trim(raw);
}

std::int64_t parse_int(const std::string& field, std::size_t offset,
                       const char* name) {
  std::int64_t value = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || field.empty()) {
    fail_at(offset, std::string("field '") + name + "' is not an integer: '" +
                        field + "'");
  }
  return value;
}

double parse_double(const std::string& field, std::size_t offset,
                    const char* name) {
  if (field.empty()) {
    fail_at(offset, std::string("field '") + name + "' is empty");
  }
  char* end = nullptr;
  const double value = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size() || !std::isfinite(value)) {
    fail_at(offset, std::string("field '") + name + "' is not a number: '" +
                        field + "'");
  }
  return value;
}

bool is_annotation_label(const std::string& label) {
  return label == "EDF Annotations";
}

// Decodes the time-stamped annotation lists packed into one record of the
// annotation signal. Each TAL is "+onset[\x15duration]\x14label\x14...\x00".
void decode_tal(std::string_view block, std::size_t record_offset,
                std::vector<Annotation>& out) {
  std::size_t pos = 0;
  while (pos < block.size()) {
    if (block[pos] == '\0') {
      ++pos;
      continue;
    }
    const std::size_t tal_end = block.find('\0', pos);
    if (tal_end == std::string_view::npos) {
      fail_at(record_offset + pos, "annotation list missing terminator");
    }
    std::string_view tal = block.substr(pos, tal_end - pos);
    pos = tal_end + 1;

    const std::size_t first_sep = tal.find('\x14');
    if (first_sep == std::string_view::npos) {
      fail_at(record_offset, "annotation without onset separator");
    }
    std::string_view stamp = tal.substr(0, first_sep);
    std::string_view labels = tal.substr(first_sep + 1);

    double onset = 0.0, duration = 0.0;
    const std::size_t dur_sep = stamp.find('\x15');
    std::string onset_str(dur_sep == std::string_view::npos
                              ? stamp
                              : stamp.substr(0, dur_sep));
    if (onset_str.empty() ||
        (onset_str[0] != '+' && onset_str[0] != '-')) {
      fail_at(record_offset, "annotation onset must be signed: '" +
                                 onset_str + "'");
    }
    onset = parse_double(onset_str, record_offset, "onset");
    if (dur_sep != std::string_view::npos) {
      duration = parse_double(std::string(stamp.substr(dur_sep + 1)),
                              record_offset, "duration");
    }

    // Remaining text is a \x14-separated label list; empty labels mark the
    // record timestamp and carry no event.
    std::size_t lpos = 0;
    while (lpos <= labels.size()) {
      const std::size_t lend = labels.find('\x14', lpos);
      std::string_view label = labels.substr(
          lpos, lend == std::string_view::npos ? labels.size() - lpos
                                               : lend - lpos);
      if (!label.empty()) {
        out.push_back(Annotation{onset, duration, std::string(label)});
      }
      if (lend == std::string_view::npos) break;
      lpos = lend + 1;
    }
  }
}

}  // namespace

Recording parse_edf(std::span<const std::byte> bytes) {
  if (bytes.size() < kFixedHeaderBytes) {
    fail_at(0, "file shorter than the 256-byte header");
  }

  Recording rec;
  std::size_t off = 0;
  rec.header.version = read_field(bytes, off, 8);
  rec.header.subject_id = read_field(bytes, off, 80);
  rec.header.recording_id = read_field(bytes, off, 80);
  rec.header.start_date = read_field(bytes, off, 8);
  rec.header.start_time = read_field(bytes, off, 8);
  rec.header.header_bytes =
      parse_int(read_field(bytes, off, 8), off - 8, "header_bytes");
  rec.header.reserved = read_field(bytes, off, 44);
  rec.header.n_records =
      parse_int(read_field(bytes, off, 8), off - 8, "n_records");
  rec.header.record_duration =
      parse_double(read_field(bytes, off, 8), off - 8, "record_duration");
  rec.header.n_signals = static_cast<int>(
      parse_int(read_field(bytes, off, 4), off - 4, "n_signals"));

  const int ns = rec.header.n_signals;
  if (ns <= 0 || ns > 4096) {
    fail_at(off, "implausible signal count " + std::to_string(ns));
  }
  if (rec.header.n_records < 0) {
    fail_at(off, "record count is negative");
  }
  const std::size_t expect_header =
      kFixedHeaderBytes + static_cast<std::size_t>(ns) * kPerSignalBytes;
  if (rec.header.header_bytes != static_cast<std::int64_t>(expect_header)) {
    fail_at(off, "header size field " +
                     std::to_string(rec.header.header_bytes) +
                     " does not match 256 + ns*256 = " +
                     std::to_string(expect_header));
  }
  if (bytes.size() < expect_header) {
    fail_at(bytes.size(), "truncated signal header block");
  }

  rec.signal_specs.resize(static_cast<std::size_t>(ns));
  auto& specs = rec.signal_specs;
  // Signal headers are stored as ns-wide arrays per field, not per signal.
  for (auto& s : specs) s.label = read_field(bytes, off, 16);
  for (auto& s : specs) s.transducer = read_field(bytes, off, 80);
  for (auto& s : specs) s.physical_dim = read_field(bytes, off, 8);
  for (auto& s : specs) {
    s.physical_min = parse_double(read_field(bytes, off, 8), off - 8,
                                  "physical_min");
  }
  for (auto& s : specs) {
    s.physical_max = parse_double(read_field(bytes, off, 8), off - 8,
                                  "physical_max");
  }
  for (auto& s : specs) {
    s.digital_min = static_cast<int>(
        parse_int(read_field(bytes, off, 8), off - 8, "digital_min"));
  }
  for (auto& s : specs) {
    s.digital_max = static_cast<int>(
        parse_int(read_field(bytes, off, 8), off - 8, "digital_max"));
  }
  for (auto& s : specs) s.prefiltering = read_field(bytes, off, 80);
  for (auto& s : specs) {
    s.samples_per_record = static_cast<int>(
        parse_int(read_field(bytes, off, 8), off - 8, "samples_per_record"));
    if (s.samples_per_record <= 0) {
      fail_at(off - 8, "samples_per_record must be positive for '" + s.label +
                           "'");
    }
  }
  off += static_cast<std::size_t>(ns) * 32;  // per-signal reserved
  if (off != expect_header) {
    fail_at(off, "signal header walk ended at the wrong offset");
  }

  std::size_t record_words = 0;
  for (const auto& s : specs) {
    record_words += static_cast<std::size_t>(s.samples_per_record);
  }
  const std::size_t record_bytes = record_words * 2;
  const std::size_t need =
      expect_header +
      record_bytes * static_cast<std::size_t>(rec.header.n_records);
  if (bytes.size() < need) {
    fail_at(bytes.size(), "data section truncated: need " +
                              std::to_string(need) + " bytes, have " +
                              std::to_string(bytes.size()));
  }

  std::vector<bool> is_annot(static_cast<std::size_t>(ns), false);
  std::vector<double> gain(static_cast<std::size_t>(ns), 1.0);
  std::vector<double> bias(static_cast<std::size_t>(ns), 0.0);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    if (is_annotation_label(s.label)) {
      is_annot[i] = true;
      continue;
    }
    if (s.digital_max == s.digital_min) {
      fail_at(expect_header, "degenerate digital range for '" + s.label + "'");
    }
    gain[i] = (s.physical_max - s.physical_min) /
              static_cast<double>(s.digital_max - s.digital_min);
    bias[i] = s.physical_min - gain[i] * s.digital_min;
    rec.channel_labels.push_back(s.label);
  }

  double fs = 0.0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (is_annot[i]) continue;
    const double f = rec.header.record_duration > 0.0
                         ? specs[i].samples_per_record /
                               rec.header.record_duration
                         : 0.0;
    if (fs == 0.0) {
      fs = f;
    } else if (std::abs(fs - f) > 1e-9) {
      fail_at(expect_header, "mixed sampling rates across data signals");
    }
  }
  rec.fs = fs;

  rec.samples.assign(rec.channel_labels.size(), {});
  const std::size_t total =
      static_cast<std::size_t>(rec.header.n_records);
  for (std::size_t i = 0, ch = 0; i < specs.size(); ++i) {
    if (is_annot[i]) continue;
    rec.samples[ch++].reserve(total *
                              static_cast<std::size_t>(specs[i].samples_per_record));
  }

  std::size_t pos = expect_header;
  for (std::int64_t r = 0; r < rec.header.n_records; ++r) {
    std::size_t ch = 0;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const std::size_t count =
          static_cast<std::size_t>(specs[i].samples_per_record);
      if (is_annot[i]) {
        std::string_view block(
            reinterpret_cast<const char*>(bytes.data() + pos), count * 2);
        decode_tal(block, pos, rec.annotations);
        pos += count * 2;
        continue;
      }
      auto& dest = rec.samples[ch++];
      for (std::size_t k = 0; k < count; ++k) {
        std::int16_t raw;
        std::memcpy(&raw, bytes.data() + pos, 2);
        pos += 2;
        dest.push_back(gain[i] * raw + bias[i]);
      }
    }
  }

  std::sort(rec.annotations.begin(), rec.annotations.end(),
            [](const Annotation& a, const Annotation& b) {
              return a.onset != b.onset ? a.onset < b.onset
                                        : a.label < b.label;
            });
  return rec;
}

namespace {

// PhysioNet eegmmidb file names look like "S042R07.edf".
void parse_subject_run(const std::string& path, Recording& rec) {
  std::size_t base = path.find_last_of("/\\");
  base = base == std::string::npos ? 0 : base + 1;
  const std::string name = path.substr(base);
  if (name.size() >= 11 && (name[0] == 'S' || name[0] == 's')) {
    const std::size_t rpos = name.find_first_of("Rr", 1);
    if (rpos != std::string::npos && rpos > 1) {
      try {
        rec.subject = std::stoi(name.substr(1, rpos - 1));
        rec.run = std::stoi(name.substr(rpos + 1, 2));
      } catch (const std::exception&) {
        rec.subject = 0;
        rec.run = 0;
      }
    }
  }
}

}  // namespace

Recording load_edf_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  Recording rec = parse_edf(
      std::span<const std::byte>(reinterpret_cast<const std::byte*>(buf.data()),
                                 buf.size()));
  parse_subject_run(path, rec);
  return rec;
}

const std::set<int>& default_excluded_subjects() {
  static const std::set<int> excluded{43, 88, 89, 92, 100, 104};
  return excluded;
}

std::vector<Trial> extract_trials(const Recording& rec,
                                  const std::set<int>& excluded) {
  std::vector<Trial> trials;
  if (excluded.contains(rec.subject)) {
    logln::info("edf", "subject " + std::to_string(rec.subject) +
                           " is excluded, skipping trials");
    return trials;
  }
  if (!(rec.fs > 0.0)) {
    throw std::runtime_error("recording has no sampling rate");
  }
  const std::size_t n = rec.n_samples();
  for (std::size_t i = 0; i < rec.annotations.size(); ++i) {
    const auto& a = rec.annotations[i];
    Side side;
    if (a.label == "T0") {
      continue;  // rest blocks carry no trial
    } else if (a.label == "T1") {
      side = Side::Left;
    } else if (a.label == "T2") {
      side = Side::Right;
    } else {
      throw std::runtime_error("unexpected annotation label '" + a.label +
                               "'");
    }
    Trial t;
    t.subject = rec.subject;
    t.kind = side;
    t.onset_sample = static_cast<std::int64_t>(std::llround(a.onset * rec.fs));
    if (t.onset_sample < 0 || static_cast<std::size_t>(t.onset_sample) >= n) {
      throw std::runtime_error("annotation onset outside the recording");
    }

    // The trial window runs to the annotated duration when present, else
    // to the next annotation onset, else to end of file.
    std::size_t end = n;
    if (a.duration > 0.0) {
      end = static_cast<std::size_t>(
          std::llround((a.onset + a.duration) * rec.fs));
    } else if (i + 1 < rec.annotations.size()) {
      end = static_cast<std::size_t>(
          std::llround(rec.annotations[i + 1].onset * rec.fs));
    }
    end = std::min(end, n);
    const auto begin = static_cast<std::size_t>(t.onset_sample);
    t.data.reserve(rec.samples.size());
    for (const auto& ch : rec.samples) {
      t.data.emplace_back(ch.begin() + static_cast<std::ptrdiff_t>(begin),
                          ch.begin() + static_cast<std::ptrdiff_t>(end));
    }
    trials.push_back(std::move(t));
  }
  return trials;
}

}  // namespace eegmc::edf
