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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eegmc/features.hpp"
#include "eegmc/rng.hpp"
#include "eegmc/tape.hpp"

namespace eegmc::nn {

/// Architecture plus optimizer hyper-parameters. dropout[0] applies to the
/// input sequence; dropout[1..depth] to each stacked layer's output
/// sequence. All dropout is non-recurrent and inverted at train time, with
/// a fresh mask per time step.
struct ModelConfig {
  int input_dim = features::kFeatureDim;
  int hidden = 256;
  int depth = 3;
  int n_steps = 7;
  std::array<double, 4> dropout{0.0, 0.2, 0.1, 0.2};
  double l2 = 0.001;  // on the LSTM weight matrices only
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
};

void validate(const ModelConfig& c);

/// Gate weights over the concatenated [h_prev, x_t]; each W_* is
/// hidden x (hidden + input), each b_* is 1 x hidden.
struct LstmLayerParams {
  Mat w_input, w_forget, w_cell, w_output;
  Mat b_input, b_forget, b_cell, b_output;
};

/// Scalar additive attention: one score per hidden state.
struct AttentionParams {
  Mat w_score;  // 1 x hidden
  Mat b_score;  // 1 x 1
};

struct Model {
  ModelConfig config;
  std::vector<LstmLayerParams> layers;
  AttentionParams attention;
  Mat w_dense;  // 1 x hidden
  Mat b_dense;  // 1 x 1
};

/// Every trainable matrix in the frozen traversal order shared by
/// checkpoints, gradients and Adam state: per layer w_input, w_forget,
/// w_cell, w_output, b_input, b_forget, b_cell, b_output; then attention
/// w_score, b_score; then dense w, b.
std::vector<Mat*> param_list(Model& m);
std::vector<const Mat*> param_list(const Model& m);
std::vector<std::string> param_names(const ModelConfig& c);
std::size_t param_count(const Model& m);

/// Glorot-uniform weights (zero biases, forget bias 1.0), reproducible
/// for a given rng state.
Model init_params(const ModelConfig& c, Rng& rng);

/// One cell update for a single example (column vectors); the reference
/// form of the gate equations.
struct CellOut {
  Eigen::VectorXd h;
  Eigen::VectorXd c;
};
CellOut lstm_cell_forward(const Eigen::VectorXd& x_t,
                          const Eigen::VectorXd& h_prev,
                          const Eigen::VectorXd& c_prev,
                          const LstmLayerParams& p);

/// Attention over a hidden-state sequence for a single example.
struct AttentionOut {
  Eigen::VectorXd v;
  Eigen::VectorXd alpha;
};
AttentionOut attention_forward(const std::vector<Eigen::VectorXd>& h,
                               const AttentionParams& p);

/// Binary cross-entropy with p clamped to [1e-12, 1 - 1e-12].
double bce_loss(double p, double y);

enum class Mode { Train, Eval };

/// One training batch: steps[t] is batch x input_dim, labels hold 0 (left)
/// or 1 (right).
struct Batch {
  std::vector<Mat> steps;
  Eigen::VectorXd labels;

  Eigen::Index size() const { return labels.size(); }
};

/// Numeric label of a class: left 0, right 1.
double label_value(edf::Side side);

/// Packs feature tensors into a batch, row b from items[b].
Batch batch_from_tensors(
    const std::vector<const features::FeatureTensor*>& items);

struct ForwardResult {
  Eigen::VectorXd p;      // per-item probability of the right class
  double data_loss = 0.;  // mean BCE
  double loss = 0.;       // data_loss + l2 penalty
};

/// Full forward pass; when `grads` is non-null also runs backward and
/// writes d(loss)/d(param) in param_list order. Train mode draws dropout
/// masks from `rng` (required when any rate is nonzero); eval mode is
/// deterministic and ignores `rng`.
ForwardResult forward_backward(const Model& m, const Batch& batch, Mode mode,
                               Rng* rng, std::vector<Mat>* grads);

/// Eval-mode probability for one feature tensor.
double predict(const Model& m, const features::FeatureTensor& t);

/// Adam accumulators, one pair per parameter in param_list order.
struct AdamState {
  std::vector<Mat> m;
  std::vector<Mat> v;
  std::int64_t t = 0;
};

/// Bias-corrected Adam update using the rates in model.config.
void adam_step(Model& model, const std::vector<Mat>& grads, AdamState& state);

/// Checkpoints: magic `ALSM`, u32 version, length-prefixed JSON header
/// (config and parameter order), then 64-bit little-endian floats;
/// optimizer state rides along when given. Round trips are bit-exact.
void save_checkpoint(const std::string& path, const Model& m,
                     const AdamState* adam = nullptr);

struct Checkpoint {
  Model model;
  bool has_adam = false;
  AdamState adam;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace eegmc::nn
