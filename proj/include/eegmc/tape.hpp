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

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace eegmc::nn {

using Mat = Eigen::MatrixXd;

/// Handle to one tape node.
struct ValueRef {
  std::int32_t idx = -1;
};

/// Reverse-mode tape over dense matrices, restricted to the op set the
/// classifier needs. Nodes only reference earlier nodes, so walking the
/// tape backwards from the loss is a valid topological order; gradients
/// accumulate additively into each node.
///
/// Matrices follow the batch-row convention: row b is batch item b.
class Tape {
 public:
  /// New leaf holding `value`; set `needs_grad` for trainable parameters.
  ValueRef leaf(Mat value, bool needs_grad = false);

  /// a * b^T. With a row-major batch and a (out x in) weight matrix this
  /// is the standard affine map, one batch item per row.
  ValueRef matmul_nt(ValueRef a, ValueRef b);

  /// Elementwise sum of same-shape matrices.
  ValueRef add(ValueRef a, ValueRef b);

  /// a + row vector b broadcast over the rows of a.
  ValueRef add_rowvec(ValueRef a, ValueRef b);

  /// Column-wise concatenation.
  ValueRef hconcat(std::span<const ValueRef> parts);

  /// Elementwise product of same-shape matrices.
  ValueRef hadamard(ValueRef a, ValueRef b);

  /// Elementwise product with a constant matrix (dropout masks).
  ValueRef mul_elem(ValueRef a, Mat mask);

  ValueRef mul_const(ValueRef a, double c);

  ValueRef sigmoid(ValueRef a);

  ValueRef tanh(ValueRef a);

  /// Softmax across each row, computed with max subtraction.
  ValueRef rowwise_softmax(ValueRef a);

  /// v(b,:) = sum_t alpha(b,t) * h_t(b,:). `alpha` is batch x T and
  /// `h` supplies T same-shape hidden matrices.
  ValueRef attention_pool(ValueRef alpha, std::span<const ValueRef> h);

  /// Sum of squared entries, as a 1x1 node.
  ValueRef sumsq(ValueRef a);

  /// Mean binary cross-entropy of column p against constant labels y,
  /// with p clamped to [1e-12, 1 - 1e-12]; 1x1 node. Outside the clamp
  /// the derivative is exactly zero, matching the clamped loss.
  ValueRef bce_mean(ValueRef p, Mat y);

  /// Seeds d(root)/d(root) = 1 and sweeps the tape in reverse. `root`
  /// must be 1x1. May be called once per tape.
  void backward(ValueRef root);

  const Mat& value(ValueRef r) const;

  /// Accumulated gradient; a zero matrix when the sweep never reached r.
  Mat grad(ValueRef r) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Op {
    Leaf,
    MatmulNT,
    Add,
    AddRowvec,
    Hconcat,
    Hadamard,
    MulElem,
    MulConst,
    Sigmoid,
    Tanh,
    RowSoftmax,
    AttentionPool,
    SumSq,
    BceMean,
  };

  struct Node {
    Mat value;
    Mat grad;  // empty until first accumulation
    Op op = Op::Leaf;
    bool needs_grad = false;
    std::vector<std::int32_t> inputs;
    Mat aux;             // mask (MulElem) or labels (BceMean)
    double scalar = 0.;  // MulConst factor
  };

  ValueRef push(Node node);
  Node& at(ValueRef r);
  const Node& at(ValueRef r) const;
  Mat& grad_buf(std::int32_t idx);
  bool any_needs_grad(std::span<const ValueRef> refs) const;
  void backprop_node(std::int32_t idx);

  std::vector<Node> nodes_;
  bool swept_ = false;
};

}  // namespace eegmc::nn
