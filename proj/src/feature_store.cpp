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

#include "eegmc/feature_store.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace eegmc::features {

namespace {

constexpr char kMagic[4] = {'E', 'E', 'G', 'F'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  if (at + 4 > in.size()) {
    throw std::runtime_error("feature store: truncated file");
  }
  return static_cast<std::uint32_t>(static_cast<unsigned char>(in[at])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + 1]))
             << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + 2]))
             << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + 3]))
             << 24;
}

edf::Side side_from_string(const std::string& s) {
  if (s == "L") return edf::Side::Left;
  if (s == "R") return edf::Side::Right;
  throw std::runtime_error("feature store: unknown label '" + s + "'");
}

}  // namespace

void FeatureStore::add(const FeatureTensor& t) {
  if (t.steps.empty()) {
    throw std::invalid_argument("feature store: tensor has no rows");
  }
  const auto steps = static_cast<std::int32_t>(t.steps.size());
  const auto feats = static_cast<std::int32_t>(t.steps.front().size());
  if (items.empty()) {
    n_steps = steps;
    n_features = feats;
  } else if (steps != n_steps || feats != n_features) {
    throw std::invalid_argument("feature store: tensor dims mismatch");
  }
  for (const auto& row : t.steps) {
    if (static_cast<std::int32_t>(row.size()) != n_features) {
      throw std::invalid_argument("feature store: ragged tensor rows");
    }
    for (const double v : row) {
      data.push_back(static_cast<float>(v));
    }
  }
  items.push_back(StoreItem{t.subject, t.trial, t.label, t.offset_seconds});
}

std::span<const float> FeatureStore::rows(std::size_t i) const {
  const std::size_t block =
      static_cast<std::size_t>(n_steps) * static_cast<std::size_t>(n_features);
  if (i >= items.size()) {
    throw std::out_of_range("feature store: item index out of range");
  }
  return {data.data() + i * block, block};
}

FeatureTensor FeatureStore::tensor(std::size_t i) const {
  const auto block = rows(i);
  FeatureTensor t;
  t.subject = items[i].subject;
  t.trial = items[i].trial;
  t.label = items[i].label;
  t.offset_seconds = items[i].offset_seconds;
  t.steps.resize(static_cast<std::size_t>(n_steps));
  for (std::int32_t s = 0; s < n_steps; ++s) {
    auto& row = t.steps[static_cast<std::size_t>(s)];
    row.resize(static_cast<std::size_t>(n_features));
    for (std::int32_t f = 0; f < n_features; ++f) {
      row[static_cast<std::size_t>(f)] = static_cast<double>(
          block[static_cast<std::size_t>(s) *
                    static_cast<std::size_t>(n_features) +
                static_cast<std::size_t>(f)]);
    }
  }
  return t;
}

void write_feature_store(const std::string& path, const FeatureStore& store) {
  const std::size_t expected = store.items.size() *
                               static_cast<std::size_t>(store.n_steps) *
                               static_cast<std::size_t>(store.n_features);
  if (store.data.size() != expected) {
    throw std::invalid_argument("feature store: data size does not match dims");
  }

  nlohmann::json header;
  header["dims"] = {{"items", store.items.size()},
                    {"steps", store.n_steps},
                    {"features", store.n_features}};
  auto items = nlohmann::json::array();
  for (const auto& it : store.items) {
    items.push_back({{"subject", it.subject},
                     {"trial", it.trial},
                     {"label", edf::to_string(it.label)},
                     {"offset", it.offset_seconds}});
  }
  header["items"] = std::move(items);
  const std::string header_text = header.dump();

  std::string out;
  out.reserve(16 + header_text.size() + store.data.size() * 4);
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(header_text.size()));
  out += header_text;
  for (const float v : store.data) {
    put_u32(out, std::bit_cast<std::uint32_t>(v));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw std::runtime_error("feature store: cannot open for write: " + path);
  }
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) {
    throw std::runtime_error("feature store: write failed: " + path);
  }
}

FeatureStore read_feature_store(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("feature store: cannot open: " + path);
  }
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());

  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw std::runtime_error("feature store: bad magic: " + path);
  }
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kVersion) {
    throw std::runtime_error("feature store: unsupported version " +
                             std::to_string(version));
  }
  const std::uint32_t header_len = get_u32(bytes, 8);
  if (12 + static_cast<std::size_t>(header_len) > bytes.size()) {
    throw std::runtime_error("feature store: truncated header: " + path);
  }
  const auto header =
      nlohmann::json::parse(bytes.substr(12, header_len), nullptr, true);

  FeatureStore store;
  store.n_steps = header.at("dims").at("steps").get<std::int32_t>();
  store.n_features = header.at("dims").at("features").get<std::int32_t>();
  const auto n_items = header.at("dims").at("items").get<std::size_t>();
  if (store.n_steps <= 0 || store.n_features <= 0) {
    throw std::runtime_error("feature store: bad dims: " + path);
  }
  store.items.reserve(n_items);
  for (const auto& it : header.at("items")) {
    StoreItem item;
    item.subject = it.at("subject").get<int>();
    item.trial = it.at("trial").get<int>();
    item.label = side_from_string(it.at("label").get<std::string>());
    item.offset_seconds = it.at("offset").get<double>();
    store.items.push_back(item);
  }
  if (store.items.size() != n_items) {
    throw std::runtime_error("feature store: item count mismatch: " + path);
  }

  const std::size_t payload_at = 12 + header_len;
  const std::size_t n_floats = n_items *
                               static_cast<std::size_t>(store.n_steps) *
                               static_cast<std::size_t>(store.n_features);
  if (bytes.size() - payload_at != n_floats * 4) {
    throw std::runtime_error("feature store: payload size mismatch: " + path);
  }
  store.data.resize(n_floats);
  for (std::size_t i = 0; i < n_floats; ++i) {
    store.data[i] = std::bit_cast<float>(get_u32(bytes, payload_at + i * 4));
  }
  return store;
}

}  // namespace eegmc::features
