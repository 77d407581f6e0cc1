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

#include "int2plan/nn/parameter.hpp"

namespace int2plan::nn {

struct AdamWConfig
{
  double learning_rate = 1e-4;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One AdamW update with decoupled weight decay:
///   p <- p (1 - lr wd) - lr m_hat / (sqrt(v_hat) + eps)
/// Gradients are left untouched.
template <typename Scalar>
void adamw_step(ParameterStore<Scalar> & store, const AdamWConfig & config)
{
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto & p = store[i];
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) {
      throw Error("nn_core", "missing gradient for parameter '" + p.name + "'");
    }
    ++p.step;
    const auto b1 = static_cast<Scalar>(config.beta1);
    const auto b2 = static_cast<Scalar>(config.beta2);
    const auto lr = static_cast<Scalar>(config.learning_rate);
    const auto correction1 = static_cast<Scalar>(1.0 - std::pow(config.beta1, static_cast<double>(p.step)));
    const auto correction2 = static_cast<Scalar>(1.0 - std::pow(config.beta2, static_cast<double>(p.step)));
    p.value *= static_cast<Scalar>(1.0 - config.learning_rate * config.weight_decay);
    p.first_moment = b1 * p.first_moment + (Scalar(1) - b1) * p.grad;
    p.second_moment = b2 * p.second_moment + (Scalar(1) - b2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= lr * (p.first_moment.array() / correction1) /
                       ((p.second_moment.array() / correction2).sqrt() + static_cast<Scalar>(config.eps));
  }
}

/// Scales all gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
template <typename Scalar>
double clip_grad_norm(ParameterStore<Scalar> & store, double max_norm)
{
  double total = 0.0;
  for (std::size_t i = 0; i < store.size(); ++i) {
    total += store[i].grad.template cast<double>().squaredNorm();
  }
  const double norm = std::sqrt(total);
  if (norm > max_norm && norm > 0.0) {
    const auto factor = static_cast<Scalar>(max_norm / norm);
    for (std::size_t i = 0; i < store.size(); ++i) store[i].grad *= factor;
  }
  return norm;
}

}  // namespace int2plan::nn
