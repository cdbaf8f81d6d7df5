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

#include "eegmc/manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace eegmc::manifest {

namespace fs = std::filesystem;

namespace {

std::string to_hex(std::span<const unsigned char> digest) {
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out.reserve(digest.size() * 2);
  for (unsigned char b : digest) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xf]);
  }
  return out;
}

struct DigestCtx {
  EVP_MD_CTX* ctx = nullptr;
  DigestCtx() : ctx(EVP_MD_CTX_new()) {
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("sha256 context initialization failed");
    }
  }
  ~DigestCtx() { EVP_MD_CTX_free(ctx); }
  DigestCtx(const DigestCtx&) = delete;
  DigestCtx& operator=(const DigestCtx&) = delete;
  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx, data, n) != 1) {
      throw std::runtime_error("sha256 update failed");
    }
  }
  std::string finish() {
    unsigned char buf[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx, buf, &len) != 1) {
      throw std::runtime_error("sha256 finalization failed");
    }
    return to_hex(std::span<const unsigned char>(buf, len));
  }
};

}  // namespace

std::string sha256_hex(std::span<const std::byte> bytes) {
  DigestCtx d;
  if (!bytes.empty()) d.update(bytes.data(), bytes.size());
  return d.finish();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  DigestCtx d;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    const std::streamsize got = in.gcount();
    if (got > 0) d.update(buf, static_cast<std::size_t>(got));
  }
  return d.finish();
}

std::vector<Entry> parse_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest '" + manifest_path + "'");
  std::vector<Entry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    Entry e;
    fields >> e.path >> e.digest;
    if (e.path.empty() || e.digest.empty()) {
      throw std::runtime_error("manifest line " + std::to_string(lineno) +
                               " malformed: '" + line + "'");
    }
    fields >> e.url;  // optional
    std::transform(e.digest.begin(), e.digest.end(), e.digest.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    entries.push_back(std::move(e));
  }
  return entries;
}

Report verify_manifest(const std::string& dir, const std::string& manifest_path) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("'" + dir + "' is not a readable directory");
  }
  const auto entries = parse_manifest(manifest_path);

  Report report;
  std::set<std::string> expected;
  for (const auto& e : entries) {
    expected.insert(e.path);
    const fs::path full = fs::path(dir) / e.path;
    if (!fs::is_regular_file(full)) {
      report.missing.push_back(e.path);
      continue;
    }
    const std::string actual = sha256_file(full.string());
    if (actual != e.digest) {
      report.corrupt.push_back(Corrupt{e.path, e.digest, actual});
    }
  }

  for (const auto& item : fs::recursive_directory_iterator(dir)) {
    if (!item.is_regular_file()) continue;
    const std::string rel =
        fs::relative(item.path(), dir).generic_string();
    if (!expected.contains(rel)) report.extra.push_back(rel);
  }
  std::sort(report.extra.begin(), report.extra.end());
  return report;
}

}  // namespace eegmc::manifest
