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

#include "eegmc/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace eegmc::nn {

namespace {

constexpr double kBceEps = 1e-12;

[[noreturn]] void dim_error(const char* op, const Mat& a, const Mat& b) {
  throw std::invalid_argument(
      std::string("tape: ") + op + ": dimension mismatch " +
      std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
      std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

}  // namespace

ValueRef Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return ValueRef{static_cast<std::int32_t>(nodes_.size() - 1)};
}

Tape::Node& Tape::at(ValueRef r) {
  if (r.idx < 0 || r.idx >= static_cast<std::int32_t>(nodes_.size())) {
    throw std::out_of_range("tape: bad value ref");
  }
  return nodes_[static_cast<std::size_t>(r.idx)];
}

const Tape::Node& Tape::at(ValueRef r) const {
  return const_cast<Tape*>(this)->at(r);
}

bool Tape::any_needs_grad(std::span<const ValueRef> refs) const {
  for (const auto r : refs) {
    if (at(r).needs_grad) return true;
  }
  return false;
}

ValueRef Tape::leaf(Mat value, bool needs_grad) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  return push(std::move(n));
}

ValueRef Tape::matmul_nt(ValueRef a, ValueRef b) {
  const Mat& av = at(a).value;
  const Mat& bv = at(b).value;
  if (av.cols() != bv.cols()) dim_error("matmul_nt", av, bv);
  Node n;
  n.value = av * bv.transpose();
  n.op = Op::MatmulNT;
  n.inputs = {a.idx, b.idx};
  n.needs_grad = any_needs_grad(std::array{a, b});
  return push(std::move(n));
}

ValueRef Tape::add(ValueRef a, ValueRef b) {
  const Mat& av = at(a).value;
  const Mat& bv = at(b).value;
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) {
    dim_error("add", av, bv);
  }
  Node n;
  n.value = av + bv;
  n.op = Op::Add;
  n.inputs = {a.idx, b.idx};
  n.needs_grad = any_needs_grad(std::array{a, b});
  return push(std::move(n));
}

ValueRef Tape::add_rowvec(ValueRef a, ValueRef b) {
  const Mat& av = at(a).value;
  const Mat& bv = at(b).value;
  if (bv.rows() != 1 || av.cols() != bv.cols()) dim_error("add_rowvec", av, bv);
  Node n;
  n.value = av.rowwise() + bv.row(0);
  n.op = Op::AddRowvec;
  n.inputs = {a.idx, b.idx};
  n.needs_grad = any_needs_grad(std::array{a, b});
  return push(std::move(n));
}

ValueRef Tape::hconcat(std::span<const ValueRef> parts) {
  if (parts.empty()) {
    throw std::invalid_argument("tape: hconcat: no inputs");
  }
  const Eigen::Index rows = at(parts[0]).value.rows();
  Eigen::Index cols = 0;
  for (const auto r : parts) {
    const Mat& v = at(r).value;
    if (v.rows() != rows) dim_error("hconcat", at(parts[0]).value, v);
    cols += v.cols();
  }
  Node n;
  n.value.resize(rows, cols);
  Eigen::Index off = 0;
  for (const auto r : parts) {
    const Mat& v = at(r).value;
    n.value.middleCols(off, v.cols()) = v;
    off += v.cols();
  }
  n.op = Op::Hconcat;
  n.inputs.reserve(parts.size());
  for (const auto r : parts) n.inputs.push_back(r.idx);
  n.needs_grad = any_needs_grad(parts);
  return push(std::move(n));
}

ValueRef Tape::hadamard(ValueRef a, ValueRef b) {
  const Mat& av = at(a).value;
  const Mat& bv = at(b).value;
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) {
    dim_error("hadamard", av, bv);
  }
  Node n;
  n.value = av.cwiseProduct(bv);
  n.op = Op::Hadamard;
  n.inputs = {a.idx, b.idx};
  n.needs_grad = any_needs_grad(std::array{a, b});
  return push(std::move(n));
}

ValueRef Tape::mul_elem(ValueRef a, Mat mask) {
  const Mat& av = at(a).value;
  if (av.rows() != mask.rows() || av.cols() != mask.cols()) {
    dim_error("mul_elem", av, mask);
  }
  Node n;
  n.value = av.cwiseProduct(mask);
  n.op = Op::MulElem;
  n.inputs = {a.idx};
  n.aux = std::move(mask);
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

ValueRef Tape::mul_const(ValueRef a, double c) {
  Node n;
  n.value = at(a).value * c;
  n.op = Op::MulConst;
  n.inputs = {a.idx};
  n.scalar = c;
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

ValueRef Tape::sigmoid(ValueRef a) {
  Node n;
  n.value = at(a).value.unaryExpr(
      [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  n.op = Op::Sigmoid;
  n.inputs = {a.idx};
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

ValueRef Tape::tanh(ValueRef a) {
  Node n;
  n.value = at(a).value.array().tanh();
  n.op = Op::Tanh;
  n.inputs = {a.idx};
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

ValueRef Tape::rowwise_softmax(ValueRef a) {
  const Mat& av = at(a).value;
  Node n;
  n.value.resize(av.rows(), av.cols());
  for (Eigen::Index r = 0; r < av.rows(); ++r) {
    const double mx = av.row(r).maxCoeff();
    Eigen::RowVectorXd e = (av.row(r).array() - mx).exp();
    n.value.row(r) = e / e.sum();
  }
  n.op = Op::RowSoftmax;
  n.inputs = {a.idx};
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

ValueRef Tape::attention_pool(ValueRef alpha, std::span<const ValueRef> h) {
  const Mat& av = at(alpha).value;
  if (h.empty() || av.cols() != static_cast<Eigen::Index>(h.size())) {
    throw std::invalid_argument("tape: attention_pool: weight/state mismatch");
  }
  const Mat& h0 = at(h[0]).value;
  Node n;
  n.value = Mat::Zero(h0.rows(), h0.cols());
  for (std::size_t t = 0; t < h.size(); ++t) {
    const Mat& ht = at(h[t]).value;
    if (ht.rows() != av.rows() || ht.rows() != h0.rows() ||
        ht.cols() != h0.cols()) {
      dim_error("attention_pool", h0, ht);
    }
    n.value.array() +=
        ht.array().colwise() * av.col(static_cast<Eigen::Index>(t)).array();
  }
  n.op = Op::AttentionPool;
  n.inputs.reserve(h.size() + 1);
  n.inputs.push_back(alpha.idx);
  for (const auto r : h) n.inputs.push_back(r.idx);
  n.needs_grad = at(alpha).needs_grad || any_needs_grad(h);
  return push(std::move(n));
}

ValueRef Tape::sumsq(ValueRef a) {
  Node n;
  n.value = Mat::Constant(1, 1, at(a).value.squaredNorm());
  n.op = Op::SumSq;
  n.inputs = {a.idx};
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

ValueRef Tape::bce_mean(ValueRef p, Mat y) {
  const Mat& pv = at(p).value;
  if (pv.cols() != 1 || y.cols() != 1 || pv.rows() != y.rows()) {
    dim_error("bce_mean", pv, y);
  }
  double loss = 0.0;
  for (Eigen::Index i = 0; i < pv.rows(); ++i) {
    const double pc = std::clamp(pv(i, 0), kBceEps, 1.0 - kBceEps);
    loss -= y(i, 0) * std::log(pc) + (1.0 - y(i, 0)) * std::log(1.0 - pc);
  }
  Node n;
  n.value = Mat::Constant(1, 1, loss / static_cast<double>(pv.rows()));
  n.op = Op::BceMean;
  n.inputs = {p.idx};
  n.aux = std::move(y);
  n.needs_grad = at(p).needs_grad;
  return push(std::move(n));
}

const Mat& Tape::value(ValueRef r) const { return at(r).value; }

Mat Tape::grad(ValueRef r) const {
  const Node& n = at(r);
  if (n.grad.size() == 0) {
    return Mat::Zero(n.value.rows(), n.value.cols());
  }
  return n.grad;
}

Mat& Tape::grad_buf(std::int32_t idx) {
  Node& n = nodes_[static_cast<std::size_t>(idx)];
  if (n.grad.size() == 0) {
    n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  }
  return n.grad;
}

void Tape::backward(ValueRef root) {
  if (swept_) {
    throw std::logic_error("tape: backward may only run once");
  }
  swept_ = true;
  const Node& r = at(root);
  if (r.value.rows() != 1 || r.value.cols() != 1) {
    throw std::invalid_argument("tape: backward root must be 1x1");
  }
  grad_buf(root.idx)(0, 0) = 1.0;
  for (std::int32_t i = root.idx; i >= 0; --i) {
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.needs_grad || n.grad.size() == 0 || n.op == Op::Leaf) continue;
    backprop_node(i);
  }
}

void Tape::backprop_node(std::int32_t idx) {
  Node& n = nodes_[static_cast<std::size_t>(idx)];
  const Mat& g = n.grad;
  const auto in = [&](std::size_t k) -> const Mat& {
    return nodes_[static_cast<std::size_t>(n.inputs[k])].value;
  };
  const auto wants = [&](std::size_t k) {
    return nodes_[static_cast<std::size_t>(n.inputs[k])].needs_grad;
  };
  const auto gbuf = [&](std::size_t k) -> Mat& {
    return grad_buf(n.inputs[k]);
  };

  switch (n.op) {
    case Op::Leaf:
      break;
    case Op::MatmulNT:
      if (wants(0)) gbuf(0) += g * in(1);
      if (wants(1)) gbuf(1) += g.transpose() * in(0);
      break;
    case Op::Add:
      if (wants(0)) gbuf(0) += g;
      if (wants(1)) gbuf(1) += g;
      break;
    case Op::AddRowvec:
      if (wants(0)) gbuf(0) += g;
      if (wants(1)) gbuf(1) += g.colwise().sum();
      break;
    case Op::Hconcat: {
      Eigen::Index off = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        const Eigen::Index cols = in(k).cols();
        if (wants(k)) gbuf(k) += g.middleCols(off, cols);
        off += cols;
      }
      break;
    }
    case Op::Hadamard:
      if (wants(0)) gbuf(0) += g.cwiseProduct(in(1));
      if (wants(1)) gbuf(1) += g.cwiseProduct(in(0));
      break;
    case Op::MulElem:
      if (wants(0)) gbuf(0) += g.cwiseProduct(n.aux);
      break;
    case Op::MulConst:
      if (wants(0)) gbuf(0) += g * n.scalar;
      break;
    case Op::Sigmoid:
      if (wants(0)) {
        gbuf(0).array() +=
            g.array() * n.value.array() * (1.0 - n.value.array());
      }
      break;
    case Op::Tanh:
      if (wants(0)) {
        gbuf(0).array() += g.array() * (1.0 - n.value.array().square());
      }
      break;
    case Op::RowSoftmax:
      if (wants(0)) {
        Mat& dst = gbuf(0);
        for (Eigen::Index r = 0; r < n.value.rows(); ++r) {
          const double dot = g.row(r).dot(n.value.row(r));
          dst.row(r).array() +=
              n.value.row(r).array() * (g.row(r).array() - dot);
        }
      }
      break;
    case Op::AttentionPool: {
      const Mat& alpha = in(0);
      for (std::size_t t = 1; t < n.inputs.size(); ++t) {
        const Eigen::Index col = static_cast<Eigen::Index>(t - 1);
        if (wants(0)) {
          grad_buf(n.inputs[0]).col(col) +=
              (g.array() * in(t).array()).rowwise().sum().matrix();
        }
        if (wants(t)) {
          gbuf(t).array() += g.array().colwise() * alpha.col(col).array();
        }
      }
      break;
    }
    case Op::SumSq:
      if (wants(0)) gbuf(0) += 2.0 * g(0, 0) * in(0);
      break;
    case Op::BceMean:
      if (wants(0)) {
        Mat& dst = gbuf(0);
        const Mat& p = in(0);
        const double scale = g(0, 0) / static_cast<double>(p.rows());
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
          const double v = p(i, 0);
          if (v < kBceEps || v > 1.0 - kBceEps) continue;  // clamped flat
          dst(i, 0) +=
              scale * (-n.aux(i, 0) / v + (1.0 - n.aux(i, 0)) / (1.0 - v));
        }
      }
      break;
  }
}

}  // namespace eegmc::nn
