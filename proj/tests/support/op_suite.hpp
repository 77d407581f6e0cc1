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

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "int2plan/intention.hpp"
#include "int2plan/model/planner_model.hpp"
#include "int2plan/nn/layers.hpp"
#include "int2plan/training.hpp"
#include "support/gradcheck.hpp"
#include "support/scenes.hpp"

namespace int2plan::testing {

struct NamedReport
{
  std::string name;
  GradCheckReport report;
};

/// Values kept at least `gap` away from zero so ReLU and L1 kinks stay
/// outside the finite-difference stencil.
template <typename Scalar>
nn::Matrix<Scalar> away_from_zero(Eigen::Index r, Eigen::Index c, std::mt19937_64 & rng, double gap = 0.1)
{
  std::normal_distribution<double> n(0.0, 1.0);
  nn::Matrix<Scalar> m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double v = n(rng);
    m.data()[i] = static_cast<Scalar>(v >= 0 ? v + gap : v - gap);
  }
  return m;
}

/// Rows of each group hold distinct values spaced by at least 0.2 so the
/// max-pool argmax cannot flip under the stencil.
template <typename Scalar>
nn::Matrix<Scalar> spaced_groups(Eigen::Index groups, Eigen::Index size, Eigen::Index cols, std::mt19937_64 & rng)
{
  nn::Matrix<Scalar> m(groups * size, cols);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  for (Eigen::Index g = 0; g < groups; ++g) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      std::vector<int> order(size);
      for (int i = 0; i < size; ++i) order[i] = i;
      std::shuffle(order.begin(), order.end(), rng);
      for (Eigen::Index t = 0; t < size; ++t) {
        m(g * size + t, c) = static_cast<Scalar>(0.3 * order[t] - 0.5 + jitter(rng));
      }
    }
  }
  return m;
}

/// Finite-difference check of every differentiable op in nn_core on random
/// shapes. Matrix-valued ops are reduced with a fixed random projection so
/// that every output element carries gradient.
template <typename Scalar>
std::vector<NamedReport> op_gradcheck_suite(std::uint64_t seed, const GradCheckOptions<Scalar> & opts = {})
{
  using nn::Matrix;
  using nn::Var;
  using G = nn::Graph<Scalar>;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim(2, 5);
  std::vector<NamedReport> out;

  auto run = [&](const std::string & name, nn::ParameterStore<Scalar> & store,
                 const std::function<Var<Scalar>(G &)> & loss) {
    std::vector<nn::Parameter<Scalar> *> params;
    for (std::size_t i = 0; i < store.size(); ++i) params.push_back(&store[i]);
    out.push_back({name, check_parameter_gradients<Scalar>(params, loss, opts)});
  };
  auto input = [&](nn::ParameterStore<Scalar> & s, const std::string & n, Matrix<Scalar> v) -> nn::Parameter<Scalar> & {
    return s.add(n, {std::uint64_t(v.rows()), std::uint64_t(v.cols())}, std::move(v));
  };
  // sum(out .* R) with R fixed
  auto project = [](G & g, const Var<Scalar> & v, const Matrix<Scalar> & r) {
    return nn::sum(nn::mul(v, g.constant(r)));
  };

  const int r = dim(rng), c = dim(rng), k = dim(rng);
  {
    nn::ParameterStore<Scalar> s;
    auto & a = input(s, "a", away_from_zero<Scalar>(r, k, rng));
    auto & b = input(s, "b", away_from_zero<Scalar>(k, c, rng));
    const Matrix<Scalar> R = away_from_zero<Scalar>(r, c, rng);
    run("matmul", s, [&](G & g) { return project(g, nn::matmul(g.parameter(a), g.parameter(b)), R); });
  }
  {
    nn::ParameterStore<Scalar> s;
    auto & a = input(s, "a", away_from_zero<Scalar>(r, k, rng));
    auto & b = input(s, "b", away_from_zero<Scalar>(c, k, rng));
    const Matrix<Scalar> R = away_from_zero<Scalar>(r, c, rng);
    run("matmul_nt", s, [&](G & g) { return project(g, nn::matmul_nt(g.parameter(a), g.parameter(b)), R); });
  }
  {
    nn::ParameterStore<Scalar> s;
    auto & a = input(s, "a", away_from_zero<Scalar>(r, c, rng));
    auto & b = input(s, "b", away_from_zero<Scalar>(r, c, rng));
    auto & row = input(s, "row", away_from_zero<Scalar>(1, c, rng));
    const Matrix<Scalar> R = away_from_zero<Scalar>(r, c, rng);
    run("add", s, [&](G & g) { return project(g, nn::add(g.parameter(a), g.parameter(b)), R); });
    run("sub", s, [&](G & g) { return project(g, nn::sub(g.parameter(a), g.parameter(b)), R); });
    run("mul", s, [&](G & g) { return project(g, nn::mul(g.parameter(a), g.parameter(b)), R); });
    run("add_row", s, [&](G & g) { return project(g, nn::add_row(g.parameter(a), g.parameter(row)), R); });
    run("scale", s, [&](G & g) { return project(g, nn::scale(g.parameter(a), Scalar(-1.7)), R); });
    run("relu", s, [&](G & g) { return project(g, nn::relu(g.parameter(a)), R); });
    run("sum", s, [&](G & g) { return nn::sum(nn::mul(g.parameter(a), g.parameter(b))); });
    run("mean", s, [&](G & g) { return nn::mean(nn::mul(g.parameter(a), g.parameter(b))); });
    run("add_all", s, [&](G & g) {
      return nn::add_all<Scalar>({project(g, g.parameter(a), R), project(g, g.parameter(b), R), nn::sum(g.parameter(row))});
    });
  }
  {
    nn::ParameterStore<Scalar> s;
    auto & a = input(s, "a", away_from_zero<Scalar>(r, c, rng));
    auto & b = input(s, "b", away_from_zero<Scalar>(r, k, rng));
    auto & d = input(s, "d", away_from_zero<Scalar>(k, c, rng));
    const Matrix<Scalar> Rc = away_from_zero<Scalar>(r, c + k, rng);
    const Matrix<Scalar> Rr = away_from_zero<Scalar>(r + k, c, rng);
    run("concat_cols", s, [&](G & g) { return project(g, nn::concat_cols<Scalar>({g.parameter(a), g.parameter(b)}), Rc); });
    run("concat_rows", s, [&](G & g) { return project(g, nn::concat_rows<Scalar>({g.parameter(a), g.parameter(d)}), Rr); });
    const Matrix<Scalar> Rs = away_from_zero<Scalar>(r - 1, c, rng);
    run("slice_rows", s, [&](G & g) { return project(g, nn::slice_rows(g.parameter(a), 1, r - 1), Rs); });
    const Matrix<Scalar> Rsc = away_from_zero<Scalar>(r, c - 1, rng);
    run("slice_cols", s, [&](G & g) { return project(g, nn::slice_cols(g.parameter(a), 1, c - 1), Rsc); });
    const Matrix<Scalar> Rt = away_from_zero<Scalar>(c, r, rng);
    run("reshape", s, [&](G & g) { return project(g, nn::reshape(g.parameter(a), c, r), Rt); });
    nn::Mask m(r);
    for (int i = 0; i < r; ++i) m(i) = i % 2 == 0;
    run("mask_rows", s, [&](G & g) { return project(g, nn::mask_rows(g.parameter(a), m), Matrix<Scalar>(Rc.leftCols(c))); });
  }
  {
    nn::ParameterStore<Scalar> s;
    const int groups = 3, size = 4;
    auto & x = input(s, "x", spaced_groups<Scalar>(groups, size, c, rng));
    nn::Mask m = nn::Mask::Constant(groups * size, true);
    m(1) = false;
    m(size + 3) = false;
    for (int t = 0; t < size; ++t) m(2 * size + t) = t == 2;
    const Matrix<Scalar> R = away_from_zero<Scalar>(groups, c, rng);
    run("max_pool", s, [&](G & g) { return project(g, nn::max_pool_groups(g.parameter(x), size, m), R); });
  }
  {
    nn::ParameterStore<Scalar> s;
    auto & x = input(s, "x", away_from_zero<Scalar>(r, c + 1, rng));
    nn::Mask m = nn::Mask::Constant(c + 1, true);
    m(0) = false;
    const Matrix<Scalar> R = away_from_zero<Scalar>(r, c + 1, rng);
    run("softmax", s, [&](G & g) { return project(g, nn::softmax_rows(g.parameter(x), m), R); });
  }
  {
    nn::ParameterStore<Scalar> s;
    auto & x = input(s, "x", away_from_zero<Scalar>(r, c + 2, rng));
    auto & gain = input(s, "gain", away_from_zero<Scalar>(1, c + 2, rng));
    auto & bias = input(s, "bias", away_from_zero<Scalar>(1, c + 2, rng));
    const Matrix<Scalar> R = away_from_zero<Scalar>(r, c + 2, rng);
    run("layer_norm", s, [&](G & g) {
      return project(g, nn::layer_norm(g.parameter(x), g.parameter(gain), g.parameter(bias)), R);
    });
  }
  {
    nn::ParameterStore<Scalar> s;
    const Matrix<Scalar> target = away_from_zero<Scalar>(r + 2, 2, rng);
    Matrix<Scalar> start = target + away_from_zero<Scalar>(r + 2, 2, rng);
    auto & pred = input(s, "pred", start);
    nn::Mask m = nn::Mask::Constant(r + 2, true);
    m(r) = false;
    run("l1_loss", s, [&](G & g) { return nn::l1_loss(g.parameter(pred), target, m); });
  }
  {
    nn::ParameterStore<Scalar> s;
    auto & logits = input(s, "logits", away_from_zero<Scalar>(1, 6, rng));
    nn::Mask m = nn::Mask::Constant(6, true);
    m(4) = false;
    run("cross_entropy", s, [&](G & g) { return nn::softmax_cross_entropy(g.parameter(logits), 2, m); });
  }
  {
    nn::ParameterStore<Scalar> s;
    nn::Rng init(seed + 1);
    nn::Mlp<Scalar> mlp(s, "mlp", c, 6, 3, 1, init);
    nn::ParameterStore<Scalar> xs;
    auto & x = input(xs, "x", away_from_zero<Scalar>(r, c, rng));
    const Matrix<Scalar> R = away_from_zero<Scalar>(r, 3, rng);
    // weights and input in one check
    std::vector<nn::Parameter<Scalar> *> params{&x};
    for (std::size_t i = 0; i < s.size(); ++i) params.push_back(&s[i]);
    out.push_back({"mlp", check_parameter_gradients<Scalar>(
      params, [&](G & g) { return project(g, mlp(g.parameter(x)), R); }, opts)});
  }
  {
    // attention on 3 queries x 4 keys, every projection and all of q, k, v
    nn::ParameterStore<Scalar> s;
    nn::Rng init(seed + 2);
    const nn::AttentionConfig cfg{8, 2};
    nn::MultiHeadAttention<Scalar> attn(s, "attn", cfg, init);
    nn::LayerNorm<Scalar> norm(s, "norm", 8);
    auto & q = input(s, "q", away_from_zero<Scalar>(3, 8, rng));
    auto & kk = input(s, "k", away_from_zero<Scalar>(4, 8, rng));
    auto & v = input(s, "v", away_from_zero<Scalar>(4, 8, rng));
    auto & pos = input(s, "pos", away_from_zero<Scalar>(3, 8, rng));
    nn::Mask m = nn::Mask::Constant(4, true);
    m(2) = false;
    const Matrix<Scalar> R = away_from_zero<Scalar>(3, 8, rng);
    run("attention", s, [&](G & g) {
      auto x = attn(g.parameter(q), g.parameter(kk), g.parameter(v), m);
      return project(g, norm(nn::add(x, g.parameter(pos))), R);
    });
  }
  return out;
}

/// Model pieces for the end-to-end check, in one scalar type.
template <typename Scalar>
struct EndToEndCase
{
  ModelConfig cfg;
  PreparedScene scene;
  std::unique_ptr<model::PlannerModel<Scalar>> model;

  nn::Var<Scalar> loss(nn::Graph<Scalar> & g) const
  {
    auto out = model->forward(g, scene.tensors, scene.intentions);
    return compute_loss(out, scene.tensors, scene.intentions, LossOptions{}).total;
  }
};

/// Micro end-to-end setup: ego plus one agent, N_q 4, t_f 5, K 2, dim 16.
template <typename Scalar>
EndToEndCase<Scalar> make_end_to_end_case(std::uint64_t seed)
{
  EndToEndCase<Scalar> c;
  c.cfg = gradcheck_config();
  const auto scenario = tiny_scenario(c.cfg.history_steps, c.cfg.future_steps);
  IntentionRow clusters;
  for (int i = 0; i < c.cfg.num_intentions; ++i) {
    clusters.push_back({Vec2(2.0 + 1.5 * i, 0.8 * (i % 2) - 0.4), IntentionSource::kCluster, true});
  }
  c.scene = prepare_scene(scenario, c.cfg, clusters);
  c.model = std::make_unique<model::PlannerModel<Scalar>>(c.cfg, seed);
  return c;
}

}  // namespace int2plan::testing
