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

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "eegmc/nn.hpp"
#include "json.hpp"

namespace eegmc::nn {

namespace {

constexpr char kMagic[4] = {'A', 'L', 'S', 'M'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

void put_f64(std::string& out, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  if (at + 4 > in.size()) {
    throw std::runtime_error("checkpoint: truncated file");
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i]))
         << (8 * i);
  }
  return v;
}

double get_f64(const std::string& in, std::size_t at) {
  if (at + 8 > in.size()) {
    throw std::runtime_error("checkpoint: truncated payload");
  }
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i]))
            << (8 * i);
  }
  return std::bit_cast<double>(bits);
}

void append_matrix(std::string& out, const Mat& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      put_f64(out, m(r, c));
    }
  }
}

std::size_t read_matrix(const std::string& in, std::size_t at, Mat& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = get_f64(in, at);
      at += 8;
    }
  }
  return at;
}

nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"input_dim", c.input_dim}, {"hidden", c.hidden},
          {"depth", c.depth},         {"n_steps", c.n_steps},
          {"dropout", c.dropout},     {"l2", c.l2},
          {"lr", c.lr},               {"beta1", c.beta1},
          {"beta2", c.beta2},         {"epsilon", c.epsilon},
          {"seed", c.seed}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.input_dim = j.at("input_dim").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.depth = j.at("depth").get<int>();
  c.n_steps = j.at("n_steps").get<int>();
  const auto d = j.at("dropout").get<std::vector<double>>();
  if (d.size() != c.dropout.size()) {
    throw std::runtime_error("checkpoint: bad dropout vector");
  }
  std::copy(d.begin(), d.end(), c.dropout.begin());
  c.l2 = j.at("l2").get<double>();
  c.lr = j.at("lr").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& m,
                     const AdamState* adam) {
  const auto params = param_list(m);
  const auto names = param_names(m.config);

  nlohmann::json header;
  header["config"] = config_to_json(m.config);
  auto plist = nlohmann::json::array();
  for (std::size_t i = 0; i < params.size(); ++i) {
    plist.push_back({{"name", names[i]},
                     {"rows", params[i]->rows()},
                     {"cols", params[i]->cols()}});
  }
  header["params"] = std::move(plist);
  header["adam"] = {{"present", adam != nullptr},
                    {"t", adam != nullptr ? adam->t : 0}};
  const std::string header_text = header.dump();

  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(header_text.size()));
  out += header_text;
  for (const Mat* p : params) append_matrix(out, *p);
  if (adam != nullptr) {
    if (adam->m.size() != params.size() || adam->v.size() != params.size()) {
      throw std::invalid_argument("checkpoint: adam state shape mismatch");
    }
    for (const Mat& mk : adam->m) append_matrix(out, mk);
    for (const Mat& vk : adam->v) append_matrix(out, vk);
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw std::runtime_error("checkpoint: cannot open for write: " + path);
  }
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) {
    throw std::runtime_error("checkpoint: write failed: " + path);
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("checkpoint: cannot open: " + path);
  }
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw std::runtime_error("checkpoint: bad magic: " + path);
  }
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kVersion) {
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(version) + " (expected " +
                             std::to_string(kVersion) + ")");
  }
  const std::uint32_t header_len = get_u32(bytes, 8);
  if (12 + static_cast<std::size_t>(header_len) > bytes.size()) {
    throw std::runtime_error("checkpoint: truncated header: " + path);
  }
  const auto header = nlohmann::json::parse(bytes.substr(12, header_len));

  Checkpoint ck;
  ck.model.config = config_from_json(header.at("config"));
  validate(ck.model.config);
  const ModelConfig& c = ck.model.config;
  ck.model.layers.resize(static_cast<std::size_t>(c.depth));
  for (int l = 0; l < c.depth; ++l) {
    auto& layer = ck.model.layers[static_cast<std::size_t>(l)];
    const Eigen::Index in =
        c.hidden + (l == 0 ? c.input_dim : c.hidden);
    for (Mat* w : {&layer.w_input, &layer.w_forget, &layer.w_cell,
                   &layer.w_output}) {
      w->resize(c.hidden, in);
    }
    for (Mat* b : {&layer.b_input, &layer.b_forget, &layer.b_cell,
                   &layer.b_output}) {
      b->resize(1, c.hidden);
    }
  }
  ck.model.attention.w_score.resize(1, c.hidden);
  ck.model.attention.b_score.resize(1, 1);
  ck.model.w_dense.resize(1, c.hidden);
  ck.model.b_dense.resize(1, 1);

  const auto params = param_list(ck.model);
  const auto names = param_names(c);
  const auto& plist = header.at("params");
  if (plist.size() != params.size()) {
    throw std::runtime_error("checkpoint: parameter count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& e = plist.at(i);
    if (e.at("name").get<std::string>() != names[i] ||
        e.at("rows").get<Eigen::Index>() != params[i]->rows() ||
        e.at("cols").get<Eigen::Index>() != params[i]->cols()) {
      throw std::runtime_error("checkpoint: parameter layout mismatch at " +
                               names[i]);
    }
  }

  std::size_t at = 12 + header_len;
  for (Mat* p : params) at = read_matrix(bytes, at, *p);

  ck.has_adam = header.at("adam").at("present").get<bool>();
  if (ck.has_adam) {
    ck.adam.t = header.at("adam").at("t").get<std::int64_t>();
    ck.adam.m.reserve(params.size());
    ck.adam.v.reserve(params.size());
    for (const Mat* p : params) {
      ck.adam.m.emplace_back(p->rows(), p->cols());
      ck.adam.v.emplace_back(p->rows(), p->cols());
    }
    for (Mat& mk : ck.adam.m) at = read_matrix(bytes, at, mk);
    for (Mat& vk : ck.adam.v) at = read_matrix(bytes, at, vk);
  }
  if (at != bytes.size()) {
    throw std::runtime_error("checkpoint: trailing bytes: " + path);
  }
  return ck;
}

}  // namespace eegmc::nn
