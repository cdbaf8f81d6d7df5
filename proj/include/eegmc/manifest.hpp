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

#ifndef EEGMC_MANIFEST_HPP_
#define EEGMC_MANIFEST_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace eegmc::manifest {

// One manifest line: "<relative-path> <hex-digest> [url]".
struct Entry {
  std::string path;
  std::string digest;
  std::string url;  // optional download source
};

struct Corrupt {
  std::string path;
  std::string expected;
  std::string actual;
};

struct Report {
  std::vector<std::string> missing;
  std::vector<Corrupt> corrupt;
  std::vector<std::string> extra;
  bool ok() const { return missing.empty() && corrupt.empty() && extra.empty(); }
};

std::string sha256_hex(std::span<const std::byte> bytes);
std::string sha256_file(const std::string& path);

std::vector<Entry> parse_manifest(const std::string& manifest_path);

// Compares the directory tree against the manifest. Regular files only;
// paths are manifest-relative with '/' separators.
Report verify_manifest(const std::string& dir, const std::string& manifest_path);

}  // namespace eegmc::manifest

#endif  // EEGMC_MANIFEST_HPP_
