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

#include "eegmc/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eegmc::nn {

namespace {

double sigmoid_scalar(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Inverted dropout mask: zero with probability `rate`, else 1/(1-rate).
// Entries are drawn row-major so the draw order is part of the contract.
Mat dropout_mask(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                 double rate) {
  Mat mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      mask(r, c) = rng.uniform() < rate ? 0.0 : keep_scale;
    }
  }
  return mask;
}

int layer_input_dim(const ModelConfig& c, int layer) {
  return layer == 0 ? c.input_dim : c.hidden;
}

}  // namespace

void validate(const ModelConfig& c) {
  if (c.input_dim < 1 || c.hidden < 1 || c.n_steps < 1) {
    throw std::invalid_argument("model config: dims must be positive");
  }
  if (c.depth < 1 || c.depth + 1 > static_cast<int>(c.dropout.size())) {
    throw std::invalid_argument("model config: depth must be in [1, 3]");
  }
  for (double d : c.dropout) {
    if (!(d >= 0.0 && d < 1.0)) {
      throw std::invalid_argument("model config: dropout rates must be in [0, 1)");
    }
  }
  if (!(c.lr > 0.0) || !(c.beta1 >= 0.0 && c.beta1 < 1.0) ||
      !(c.beta2 >= 0.0 && c.beta2 < 1.0) || !(c.epsilon > 0.0) ||
      c.l2 < 0.0) {
    throw std::invalid_argument("model config: bad optimizer scalars");
  }
}

std::vector<Mat*> param_list(Model& m) {
  std::vector<Mat*> out;
  out.reserve(static_cast<std::size_t>(m.config.depth) * 8 + 4);
  for (auto& l : m.layers) {
    out.push_back(&l.w_input);
    out.push_back(&l.w_forget);
    out.push_back(&l.w_cell);
    out.push_back(&l.w_output);
    out.push_back(&l.b_input);
    out.push_back(&l.b_forget);
    out.push_back(&l.b_cell);
    out.push_back(&l.b_output);
  }
  out.push_back(&m.attention.w_score);
  out.push_back(&m.attention.b_score);
  out.push_back(&m.w_dense);
  out.push_back(&m.b_dense);
  return out;
}

std::vector<const Mat*> param_list(const Model& m) {
  auto mutable_list = param_list(const_cast<Model&>(m));
  return {mutable_list.begin(), mutable_list.end()};
}

std::vector<std::string> param_names(const ModelConfig& c) {
  std::vector<std::string> names;
  for (int l = 0; l < c.depth; ++l) {
    const std::string base = "layer" + std::to_string(l) + ".";
    for (const char* gate : {"w_input", "w_forget", "w_cell", "w_output",
                             "b_input", "b_forget", "b_cell", "b_output"}) {
      names.push_back(base + gate);
    }
  }
  names.emplace_back("attention.w_score");
  names.emplace_back("attention.b_score");
  names.emplace_back("dense.w");
  names.emplace_back("dense.b");
  return names;
}

std::size_t param_count(const Model& m) {
  std::size_t n = 0;
  for (const Mat* p : param_list(m)) {
    n += static_cast<std::size_t>(p->size());
  }
  return n;
}

Model init_params(const ModelConfig& c, Rng& rng) {
  validate(c);
  Model m;
  m.config = c;
  m.layers.resize(static_cast<std::size_t>(c.depth));

  const auto glorot = [&rng](Mat& w, Eigen::Index rows, Eigen::Index cols) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(rows + cols));
    w.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index cc = 0; cc < cols; ++cc) {
        w(r, cc) = rng.uniform(-limit, limit);
      }
    }
  };

  for (int l = 0; l < c.depth; ++l) {
    auto& layer = m.layers[static_cast<std::size_t>(l)];
    const Eigen::Index in = c.hidden + layer_input_dim(c, l);
    glorot(layer.w_input, c.hidden, in);
    glorot(layer.w_forget, c.hidden, in);
    glorot(layer.w_cell, c.hidden, in);
    glorot(layer.w_output, c.hidden, in);
    layer.b_input = Mat::Zero(1, c.hidden);
    layer.b_forget = Mat::Ones(1, c.hidden);  // standard forget-gate bias
    layer.b_cell = Mat::Zero(1, c.hidden);
    layer.b_output = Mat::Zero(1, c.hidden);
  }
  glorot(m.attention.w_score, 1, c.hidden);
  m.attention.b_score = Mat::Zero(1, 1);
  glorot(m.w_dense, 1, c.hidden);
  m.b_dense = Mat::Zero(1, 1);
  return m;
}

CellOut lstm_cell_forward(const Eigen::VectorXd& x_t,
                          const Eigen::VectorXd& h_prev,
                          const Eigen::VectorXd& c_prev,
                          const LstmLayerParams& p) {
  const Eigen::Index hidden = h_prev.size();
  if (p.w_input.rows() != hidden ||
      p.w_input.cols() != hidden + x_t.size() || c_prev.size() != hidden) {
    throw std::invalid_argument("lstm_cell_forward: dimension mismatch");
  }
  Eigen::VectorXd z(hidden + x_t.size());
  z << h_prev, x_t;

  const auto gate = [&](const Mat& w, const Mat& b) -> Eigen::ArrayXd {
    return (w * z + b.transpose()).array();
  };
  const Eigen::ArrayXd i =
      gate(p.w_input, p.b_input).unaryExpr([](double v) {
        return sigmoid_scalar(v);
      });
  const Eigen::ArrayXd f =
      gate(p.w_forget, p.b_forget).unaryExpr([](double v) {
        return sigmoid_scalar(v);
      });
  const Eigen::ArrayXd g = gate(p.w_cell, p.b_cell).tanh();
  const Eigen::ArrayXd o =
      gate(p.w_output, p.b_output).unaryExpr([](double v) {
        return sigmoid_scalar(v);
      });

  CellOut out;
  out.c = (f * c_prev.array() + i * g).matrix();
  out.h = (o * out.c.array().tanh()).matrix();
  return out;
}

AttentionOut attention_forward(const std::vector<Eigen::VectorXd>& h,
                               const AttentionParams& p) {
  if (h.empty()) {
    throw std::invalid_argument("attention_forward: empty sequence");
  }
  const Eigen::Index hidden = h.front().size();
  if (p.w_score.rows() != 1 || p.w_score.cols() != hidden) {
    throw std::invalid_argument("attention_forward: dimension mismatch");
  }
  Eigen::VectorXd u(static_cast<Eigen::Index>(h.size()));
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i].size() != hidden) {
      throw std::invalid_argument("attention_forward: ragged sequence");
    }
    u(static_cast<Eigen::Index>(i)) =
        std::tanh((p.w_score * h[i])(0, 0) + p.b_score(0, 0));
  }
  const double mx = u.maxCoeff();
  Eigen::VectorXd e = (u.array() - mx).exp();
  AttentionOut out;
  out.alpha = e / e.sum();
  out.v = Eigen::VectorXd::Zero(hidden);
  for (std::size_t i = 0; i < h.size(); ++i) {
    out.v += out.alpha(static_cast<Eigen::Index>(i)) * h[i];
  }
  return out;
}

double bce_loss(double p, double y) {
  const double pc = std::clamp(p, 1e-12, 1.0 - 1e-12);
  return -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
}

double label_value(edf::Side side) {
  return side == edf::Side::Right ? 1.0 : 0.0;
}

Batch batch_from_tensors(
    const std::vector<const features::FeatureTensor*>& items) {
  if (items.empty()) {
    throw std::invalid_argument("batch_from_tensors: empty batch");
  }
  const std::size_t steps = items.front()->steps.size();
  const std::size_t dim = items.front()->steps.front().size();
  Batch b;
  b.steps.assign(steps, Mat(static_cast<Eigen::Index>(items.size()),
                            static_cast<Eigen::Index>(dim)));
  b.labels.resize(static_cast<Eigen::Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& t = *items[i];
    if (t.steps.size() != steps) {
      throw std::invalid_argument("batch_from_tensors: ragged step counts");
    }
    for (std::size_t s = 0; s < steps; ++s) {
      if (t.steps[s].size() != dim) {
        throw std::invalid_argument("batch_from_tensors: ragged feature dims");
      }
      for (std::size_t f = 0; f < dim; ++f) {
        b.steps[s](static_cast<Eigen::Index>(i),
                   static_cast<Eigen::Index>(f)) = t.steps[s][f];
      }
    }
    b.labels(static_cast<Eigen::Index>(i)) = label_value(t.label);
  }
  return b;
}

ForwardResult forward_backward(const Model& m, const Batch& batch, Mode mode,
                               Rng* rng, std::vector<Mat>* grads) {
  const ModelConfig& c = m.config;
  validate(c);
  if (static_cast<int>(batch.steps.size()) != c.n_steps) {
    throw std::invalid_argument("forward: batch step count mismatch");
  }
  const Eigen::Index bsz = batch.size();
  for (const Mat& x : batch.steps) {
    if (x.rows() != bsz || x.cols() != c.input_dim) {
      throw std::invalid_argument("forward: batch tensor shape mismatch");
    }
  }
  const bool train = mode == Mode::Train;
  bool any_dropout = false;
  for (int l = 0; l <= c.depth; ++l) {
    any_dropout = any_dropout || c.dropout[static_cast<std::size_t>(l)] > 0.0;
  }
  if (train && any_dropout && rng == nullptr) {
    throw std::invalid_argument("forward: train mode with dropout needs rng");
  }

  Tape tape;
  const bool needs_grad = grads != nullptr;

  // Parameter leaves mirror param_list order so gradients read back flat.
  const auto params = param_list(m);
  std::vector<ValueRef> prefs;
  prefs.reserve(params.size());
  for (const Mat* p : params) {
    prefs.push_back(tape.leaf(*p, needs_grad));
  }
  // Tape refs of the four gate weight matrices per layer, for the l2 term.
  std::vector<ValueRef> l2_refs;
  for (int l = 0; l < c.depth; ++l) {
    for (int g = 0; g < 4; ++g) {
      l2_refs.push_back(prefs[static_cast<std::size_t>(l * 8 + g)]);
    }
  }
  const auto layer_ref = [&](int layer, int slot) {
    return prefs[static_cast<std::size_t>(layer * 8 + slot)];
  };
  const ValueRef w_score = prefs[prefs.size() - 4];
  const ValueRef b_score = prefs[prefs.size() - 3];
  const ValueRef w_dense = prefs[prefs.size() - 2];
  const ValueRef b_dense = prefs[prefs.size() - 1];

  std::vector<ValueRef> xs;
  xs.reserve(static_cast<std::size_t>(c.n_steps));
  for (const Mat& x : batch.steps) {
    xs.push_back(tape.leaf(x, false));
  }
  const auto apply_dropout = [&](std::vector<ValueRef>& seq, double rate) {
    if (!train || rate <= 0.0) return;
    for (auto& r : seq) {
      const Mat& v = tape.value(r);
      r = tape.mul_elem(r, dropout_mask(*rng, v.rows(), v.cols(), rate));
    }
  };
  apply_dropout(xs, c.dropout[0]);

  for (int l = 0; l < c.depth; ++l) {
    ValueRef h = tape.leaf(Mat::Zero(bsz, c.hidden), false);
    ValueRef cell = tape.leaf(Mat::Zero(bsz, c.hidden), false);
    std::vector<ValueRef> hs;
    hs.reserve(xs.size());
    for (const ValueRef x : xs) {
      const std::array zin{h, x};
      const ValueRef z = tape.hconcat(zin);
      const auto gate = [&](int slot) {
        return tape.add_rowvec(tape.matmul_nt(z, layer_ref(l, slot)),
                               layer_ref(l, slot + 4));
      };
      const ValueRef i = tape.sigmoid(gate(0));
      const ValueRef f = tape.sigmoid(gate(1));
      const ValueRef g = tape.tanh(gate(2));
      const ValueRef o = tape.sigmoid(gate(3));
      cell = tape.add(tape.hadamard(f, cell), tape.hadamard(i, g));
      h = tape.hadamard(o, tape.tanh(cell));
      hs.push_back(h);
    }
    apply_dropout(hs, c.dropout[static_cast<std::size_t>(l) + 1]);
    xs = std::move(hs);
  }

  std::vector<ValueRef> scores;
  scores.reserve(xs.size());
  for (const ValueRef h : xs) {
    scores.push_back(
        tape.tanh(tape.add_rowvec(tape.matmul_nt(h, w_score), b_score)));
  }
  const ValueRef alpha = tape.rowwise_softmax(tape.hconcat(scores));
  const ValueRef v = tape.attention_pool(alpha, xs);
  const ValueRef logit = tape.add_rowvec(tape.matmul_nt(v, w_dense), b_dense);
  const ValueRef p = tape.sigmoid(logit);

  Mat y(bsz, 1);
  y.col(0) = batch.labels;
  const ValueRef data_loss = tape.bce_mean(p, std::move(y));

  ValueRef loss = data_loss;
  if (c.l2 > 0.0) {
    ValueRef penalty = tape.sumsq(l2_refs.front());
    for (std::size_t i = 1; i < l2_refs.size(); ++i) {
      penalty = tape.add(penalty, tape.sumsq(l2_refs[i]));
    }
    loss = tape.add(data_loss, tape.mul_const(penalty, c.l2));
  }

  ForwardResult out;
  out.p = tape.value(p).col(0);
  out.data_loss = tape.value(data_loss)(0, 0);
  out.loss = tape.value(loss)(0, 0);

  if (needs_grad) {
    tape.backward(loss);
    grads->clear();
    grads->reserve(prefs.size());
    for (const ValueRef r : prefs) {
      grads->push_back(tape.grad(r));
    }
  }
  return out;
}

double predict(const Model& m, const features::FeatureTensor& t) {
  std::vector<const features::FeatureTensor*> one{&t};
  const Batch b = batch_from_tensors(one);
  return forward_backward(m, b, Mode::Eval, nullptr, nullptr).p(0);
}

void adam_step(Model& model, const std::vector<Mat>& grads, AdamState& state) {
  const auto params = param_list(model);
  if (grads.size() != params.size()) {
    throw std::invalid_argument("adam_step: gradient count mismatch");
  }
  if (state.m.empty()) {
    state.m.reserve(params.size());
    state.v.reserve(params.size());
    for (const Mat* p : params) {
      state.m.push_back(Mat::Zero(p->rows(), p->cols()));
      state.v.push_back(Mat::Zero(p->rows(), p->cols()));
    }
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw std::invalid_argument("adam_step: state shape mismatch");
  }
  const ModelConfig& c = model.config;
  state.t += 1;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Mat& g = grads[k];
    Mat& mk = state.m[k];
    Mat& vk = state.v[k];
    if (g.rows() != mk.rows() || g.cols() != mk.cols()) {
      throw std::invalid_argument("adam_step: gradient shape mismatch");
    }
    mk = c.beta1 * mk + (1.0 - c.beta1) * g;
    vk = c.beta2 * vk + (1.0 - c.beta2) * g.cwiseProduct(g);
    params[k]->array() -= c.lr * (mk.array() / bc1) /
                          ((vk.array() / bc2).sqrt() + c.epsilon);
  }
}

}  // namespace eegmc::nn
