// Copyright 2026 The Int2Plan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "int2plan/nn/ops.hpp"

namespace int2plan::nn {

using Rng = std::mt19937_64;

template <typename Scalar>
Matrix<Scalar> xavier_uniform(Eigen::Index fan_in, Eigen::Index fan_out, Rng & rng)
{
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix<Scalar> w(fan_in, fan_out);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<Scalar>(dist(rng));
  return w;
}

template <typename Scalar>
Matrix<Scalar> normal_init(Eigen::Index rows, Eigen::Index cols, double stddev, Rng & rng)
{
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix<Scalar> w(rows, cols);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<Scalar>(dist(rng));
  return w;
}

/// y = x W + b with W [in, out].
template <typename Scalar>
class Linear
{
public:
  Linear() = default;
  Linear(ParameterStore<Scalar> & store, const std::string & prefix, int in, int out, Rng & rng)
  : weight_(&store.add(prefix + ".weight", {std::uint64_t(in), std::uint64_t(out)}, xavier_uniform<Scalar>(in, out, rng))),
    bias_(&store.add(prefix + ".bias", {std::uint64_t(out)}, Matrix<Scalar>::Zero(1, out)))
  {
  }

  Var<Scalar> operator()(const Var<Scalar> & x) const
  {
    if (x.cols() != weight_->value.rows()) {
      throw Error(
        "nn_core", "linear '" + weight_->name + "': expected input dim " +
                     std::to_string(weight_->value.rows()) + ", got " + std::to_string(x.cols()));
    }
    auto & g = x.graph();
    return add_row(matmul(x, g.parameter(*weight_)), g.parameter(*bias_));
  }

  int in_dim() const { return static_cast<int>(weight_->value.rows()); }
  int out_dim() const { return static_cast<int>(weight_->value.cols()); }
  Parameter<Scalar> & weight() const { return *weight_; }
  Parameter<Scalar> & bias() const { return *bias_; }

private:
  Parameter<Scalar> * weight_ = nullptr;
  Parameter<Scalar> * bias_ = nullptr;
};

/// Affine -> ReLU -> ... -> affine. `hidden_layers` counts the ReLU layers.
template <typename Scalar>
class Mlp
{
public:
  Mlp() = default;
  Mlp(
    ParameterStore<Scalar> & store, const std::string & prefix, int in, int hidden, int out,
    int hidden_layers, Rng & rng)
  {
    int width = in;
    for (int i = 0; i < hidden_layers; ++i) {
      layers_.emplace_back(store, prefix + ".layers." + std::to_string(i), width, hidden, rng);
      width = hidden;
    }
    layers_.emplace_back(store, prefix + ".layers." + std::to_string(hidden_layers), width, out, rng);
  }

  Var<Scalar> operator()(Var<Scalar> x) const
  {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      x = layers_[i](x);
      if (i + 1 < layers_.size()) x = relu(x);
    }
    return x;
  }

  const std::vector<Linear<Scalar>> & layers() const { return layers_; }

private:
  std::vector<Linear<Scalar>> layers_;
};

template <typename Scalar>
class LayerNorm
{
public:
  LayerNorm() = default;
  LayerNorm(ParameterStore<Scalar> & store, const std::string & prefix, int dim)
  : gain_(&store.add(prefix + ".gain", {std::uint64_t(dim)}, Matrix<Scalar>::Ones(1, dim))),
    bias_(&store.add(prefix + ".bias", {std::uint64_t(dim)}, Matrix<Scalar>::Zero(1, dim)))
  {
  }

  Var<Scalar> operator()(const Var<Scalar> & x) const
  {
    auto & g = x.graph();
    return layer_norm(x, g.parameter(*gain_), g.parameter(*bias_));
  }

private:
  Parameter<Scalar> * gain_ = nullptr;
  Parameter<Scalar> * bias_ = nullptr;
};

struct AttentionConfig
{
  int model_dim = 128;
  int heads = 8;

  int head_dim() const { return model_dim / heads; }
  void validate() const
  {
    if (model_dim <= 0 || heads <= 0 || model_dim % heads != 0) {
      throw Error("nn_core", "attention model_dim must be divisible by heads");
    }
  }
};

/// Per-head attention weights [Lq, Lk], filled when requested.
template <typename Scalar>
struct AttentionTrace
{
  std::vector<Matrix<Scalar>> weights;
};

/// Scaled dot-product attention with input and output projections, no
/// residual: softmax((q Wq)(k Wk)^T / sqrt(d)) (v Wv), heads concatenated,
/// then Wo.
template <typename Scalar>
class MultiHeadAttention
{
public:
  MultiHeadAttention() = default;
  MultiHeadAttention(
    ParameterStore<Scalar> & store, const std::string & prefix, const AttentionConfig & config, Rng & rng)
  : config_(config)
  {
    config.validate();
    const int d = config.model_dim;
    q_proj_ = Linear<Scalar>(store, prefix + ".q_proj", d, d, rng);
    k_proj_ = Linear<Scalar>(store, prefix + ".k_proj", d, d, rng);
    v_proj_ = Linear<Scalar>(store, prefix + ".v_proj", d, d, rng);
    out_proj_ = Linear<Scalar>(store, prefix + ".out_proj", d, d, rng);
  }

  Var<Scalar> operator()(
    const Var<Scalar> & query, const Var<Scalar> & key, const Var<Scalar> & value,
    const Mask & key_mask, AttentionTrace<Scalar> * trace = nullptr) const
  {
    if (key.rows() != value.rows()) throw Error("nn_core", "attention: key/value lengths differ");
    if (key_mask.size() != key.rows()) throw Error("nn_core", "attention: key mask length mismatch");
    if (!key_mask.any()) throw Error("nn_core", "attention: all keys masked");
    const auto q = q_proj_(query);
    const auto k = k_proj_(key);
    const auto v = v_proj_(value);
    const int hd = config_.head_dim();
    const Scalar inv_sqrt = Scalar(1) / std::sqrt(static_cast<Scalar>(hd));
    std::vector<Var<Scalar>> heads;
    heads.reserve(config_.heads);
    if (trace) trace->weights.clear();
    for (int h = 0; h < config_.heads; ++h) {
      auto qh = slice_cols(q, h * hd, hd);
      auto kh = slice_cols(k, h * hd, hd);
      auto vh = slice_cols(v, h * hd, hd);
      auto weights = softmax_rows(scale(matmul_nt(qh, kh), inv_sqrt), key_mask);
      if (trace) trace->weights.push_back(weights.value());
      heads.push_back(matmul(weights, vh));
    }
    auto merged = config_.heads == 1 ? heads.front() : concat_cols(heads);
    return out_proj_(merged);
  }

  const AttentionConfig & config() const { return config_; }
  const Linear<Scalar> & out_proj() const { return out_proj_; }

private:
  AttentionConfig config_;
  Linear<Scalar> q_proj_, k_proj_, v_proj_, out_proj_;
};

/// Pre-norm attention block: x + MHA(LN(x) + pos, keys, values).
/// Self-attention uses LN(x) (+ pos) as keys and LN(x) as values.
template <typename Scalar>
class AttentionBlock
{
public:
  AttentionBlock() = default;
  AttentionBlock(
    ParameterStore<Scalar> & store, const std::string & prefix, const AttentionConfig & config, Rng & rng)
  : norm_(store, prefix + ".norm", config.model_dim), attention_(store, prefix + ".attn", config, rng)
  {
  }

  Var<Scalar> self_attend(
    const Var<Scalar> & x, const Mask & mask, const std::optional<Var<Scalar>> & pos = std::nullopt,
    AttentionTrace<Scalar> * trace = nullptr) const
  {
    const auto normed = norm_(x);
    const auto qk = pos ? add(normed, *pos) : normed;
    return add(x, attention_(qk, qk, normed, mask, trace));
  }

  Var<Scalar> cross_attend(
    const Var<Scalar> & x, const Var<Scalar> & memory, const Mask & memory_mask,
    const std::optional<Var<Scalar>> & pos = std::nullopt, AttentionTrace<Scalar> * trace = nullptr) const
  {
    const auto normed = norm_(x);
    const auto q = pos ? add(normed, *pos) : normed;
    return add(x, attention_(q, memory, memory, memory_mask, trace));
  }

  const MultiHeadAttention<Scalar> & attention() const { return attention_; }

private:
  LayerNorm<Scalar> norm_;
  MultiHeadAttention<Scalar> attention_;
};

}  // namespace int2plan::nn
