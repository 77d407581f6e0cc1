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

#include <string>
#include <vector>

#include "int2plan/intention.hpp"
#include "int2plan/model/encoders.hpp"

namespace int2plan::model {

/// Prediction-branch result of one decoder iteration for one agent.
template <typename Scalar>
struct PredictionStep
{
  Var<Scalar> query;         // Q_k [N_q, dim]
  Var<Scalar> trajectories;  // [N_q, 2 t_f], absolute scene-frame x/y interleaved
  Var<Scalar> logits;        // [1, N_q]
};

template <typename Scalar>
struct PlanningStep
{
  Var<Scalar> route_content;  // R_k [N_q, dim]
  Var<Scalar> trajectories;   // [N_q, 2 t_f]
  Var<Scalar> logits;         // [1, N_q]
};

template <typename Scalar>
struct IterationOutput
{
  /// Per agent slot; undefined Vars for slots that were not decoded.
  std::vector<Var<Scalar>> pred_trajectories;
  std::vector<Var<Scalar>> pred_logits;
  Var<Scalar> plan_trajectories;
  Var<Scalar> plan_logits;
};

/// Softmax over the valid entries; invalid entries are exactly zero.
inline Eigen::VectorXd masked_softmax(const Eigen::VectorXd & logits, const Mask & valid)
{
  Eigen::VectorXd out = Eigen::VectorXd::Zero(logits.size());
  if (!valid.any()) return out;
  double peak = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (valid(i)) peak = std::max(peak, logits(i));
  }
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (valid(i)) out(i) = std::exp(logits(i) - peak);
  }
  return out / out.sum();
}

/// All K iterations of the trajectory generator.
template <typename Scalar>
struct MultiModalOutput
{
  int future_steps = 0;
  int num_intentions = 0;
  Mask agent_decoded;               // slots that have prediction outputs
  std::vector<Mask> intention_masks;  // per agent slot
  std::vector<IterationOutput<Scalar>> iterations;

  int num_iterations() const { return static_cast<int>(iterations.size()); }

  /// [t_f, 2] trajectory of one prediction mode.
  Eigen::MatrixX2d prediction(int k, int agent, int mode) const
  {
    return as_points(iterations.at(k).pred_trajectories.at(agent).value(), mode);
  }
  Eigen::VectorXd prediction_scores(int k, int agent) const
  {
    return masked_softmax(logits_of(iterations.at(k).pred_logits.at(agent)), intention_masks.at(agent));
  }
  Eigen::MatrixX2d plan(int k, int mode) const
  {
    return as_points(iterations.at(k).plan_trajectories.value(), mode);
  }
  Eigen::VectorXd plan_scores(int k) const
  {
    return masked_softmax(logits_of(iterations.at(k).plan_logits), intention_masks.at(0));
  }

private:
  Eigen::MatrixX2d as_points(const Matrix<Scalar> & rows, int mode) const
  {
    Eigen::MatrixX2d pts(future_steps, 2);
    for (int t = 0; t < future_steps; ++t) {
      pts(t, 0) = static_cast<double>(rows(mode, 2 * t));
      pts(t, 1) = static_cast<double>(rows(mode, 2 * t + 1));
    }
    return pts;
  }
  static Eigen::VectorXd logits_of(const Var<Scalar> & v)
  {
    return v.value().row(0).transpose().template cast<double>();
  }
};

template <typename Scalar>
struct DecoderLayer
{
  nn::AttentionBlock<Scalar> pred_self;
  nn::AttentionBlock<Scalar> pred_cross;
  nn::Mlp<Scalar> pred_head;
  nn::AttentionBlock<Scalar> plan_self;
  nn::AttentionBlock<Scalar> plan_cross;
  nn::Mlp<Scalar> plan_head;
};

/// Iterative intention-query decoder. Each iteration owns its parameters.
template <typename Scalar>
class TrajectoryDecoder
{
public:
  TrajectoryDecoder() = default;
  TrajectoryDecoder(nn::ParameterStore<Scalar> & store, const std::string & prefix, const ModelConfig & cfg, nn::Rng & rng)
  : cfg_(cfg),
    intent_mlp_(store, prefix + ".intent_mlp", 2, cfg.dim, cfg.dim, 1, rng),
    init_query_(&store.add(
      prefix + ".init_query", {std::uint64_t(cfg.dim)}, nn::normal_init<Scalar>(1, cfg.dim, 0.02, rng)))
  {
    const nn::AttentionConfig attn{cfg.dim, cfg.heads};
    const int out = 2 * cfg.future_steps + 1;
    for (int k = 0; k < cfg.iterations; ++k) {
      const auto p = prefix + ".iter" + std::to_string(k);
      DecoderLayer<Scalar> layer;
      layer.pred_self = nn::AttentionBlock<Scalar>(store, p + ".pred_self", attn, rng);
      layer.pred_cross = nn::AttentionBlock<Scalar>(store, p + ".pred_cross", attn, rng);
      layer.pred_head = nn::Mlp<Scalar>(store, p + ".pred_head", cfg.dim, cfg.mlp_hidden, out, cfg.mlp_hidden_layers, rng);
      layer.plan_self = nn::AttentionBlock<Scalar>(store, p + ".plan_self", attn, rng);
      layer.plan_cross = nn::AttentionBlock<Scalar>(store, p + ".plan_cross", attn, rng);
      layer.plan_head =
        nn::Mlp<Scalar>(store, p + ".plan_head", 2 * cfg.dim, cfg.mlp_hidden, out, cfg.mlp_hidden_layers, rng);
      layers_.push_back(std::move(layer));
    }
  }

  /// Q_g = φ_g(G) per agent row; invalid slots embed to zero.
  std::vector<Var<Scalar>> init_intention_queries(Graph<Scalar> & g, const IntentionSet & intentions) const
  {
    std::vector<Var<Scalar>> out;
    for (const auto & row : intentions.rows) {
      Matrix<Scalar> pts(row.size(), 2);
      Mask valid(row.size());
      for (std::size_t i = 0; i < row.size(); ++i) {
        pts(i, 0) = static_cast<Scalar>(row[i].position.x() / cfg_.coordinate_scale);
        pts(i, 1) = static_cast<Scalar>(row[i].position.y() / cfg_.coordinate_scale);
        valid(i) = row[i].valid;
      }
      out.push_back(nn::mask_rows(intent_mlp_(g.constant(pts)), valid));
    }
    return out;
  }

  /// Q_1: the trainable initial content broadcast to every mode.
  Var<Scalar> initial_query(Graph<Scalar> & g, int num_modes) const
  {
    return nn::matmul(g.constant(Matrix<Scalar>::Ones(num_modes, 1)), g.parameter(*init_query_));
  }

  PredictionStep<Scalar> decode_prediction_iteration(
    int k, const Var<Scalar> & q_prev, const Var<Scalar> & q_g, const Var<Scalar> & context,
    const Mask & context_mask, const Mask & intention_mask, const Vec2 & agent_position) const
  {
    check_queries(q_prev, q_g, intention_mask);
    if (context.cols() != cfg_.dim || context_mask.size() != context.rows()) {
      throw Error("trajectory_decoder", "context shape mismatch");
    }
    if (!context_mask.any()) throw Error("trajectory_decoder", "empty context");
    const auto & layer = layers_.at(k);
    auto h = layer.pred_self.self_attend(q_prev, intention_mask, q_g);
    auto q = layer.pred_cross.cross_attend(h, context, context_mask, q_g);
    auto [traj, logits] = split_head(layer.pred_head(q), agent_position);
    return {q, traj, logits};
  }

  PlanningStep<Scalar> decode_planning_iteration(
    int k, const Var<Scalar> & q_ego, const Var<Scalar> & q_g_ego, const Var<Scalar> & route_tokens,
    const Mask & route_mask, const Mask & intention_mask) const
  {
    check_queries(q_ego, q_g_ego, intention_mask);
    if (route_tokens.cols() != cfg_.dim || route_mask.size() != route_tokens.rows()) {
      throw Error("trajectory_decoder", "route embedding shape mismatch");
    }
    const auto & layer = layers_.at(k);
    auto h = layer.plan_self.self_attend(q_ego, intention_mask, q_g_ego);
    auto route_content = layer.plan_cross.cross_attend(h, route_tokens, route_mask, q_g_ego);
    auto head_in = nn::concat_cols<Scalar>({q_ego, route_content});
    auto [traj, logits] = split_head(layer.plan_head(head_in), Vec2::Zero());
    return {route_content, traj, logits};
  }

  /// Runs `iterations` decoder iterations (at most the configured K).
  /// `route` is R_em, or C_em when the route embedding is disabled.
  MultiModalOutput<Scalar> run(
    Graph<Scalar> & g, const ContextEmbedding<Scalar> & context, const Var<Scalar> & route,
    const Mask & route_mask, const IntentionSet & intentions, const RowMatrixXd & agent_pose,
    const Mask & agent_mask, int iterations) const
  {
    if (iterations < 1 || iterations > static_cast<int>(layers_.size())) {
      throw Error("trajectory_decoder", "iteration count must be in [1, K]");
    }
    MultiModalOutput<Scalar> out;
    out.future_steps = cfg_.future_steps;
    out.num_intentions = intentions.num_intentions();
    const int n_agents = intentions.num_agents();
    out.agent_decoded = Mask::Constant(n_agents, false);
    for (int a = 0; a < n_agents; ++a) {
      Mask m(out.num_intentions);
      for (int i = 0; i < out.num_intentions; ++i) m(i) = intentions.rows[a][i].valid;
      out.agent_decoded(a) = agent_mask(a) && m.any();
      out.intention_masks.push_back(std::move(m));
    }
    if (!out.agent_decoded(0)) throw Error("trajectory_decoder", "ego has no valid intentions");

    const auto q_g = init_intention_queries(g, intentions);
    std::vector<Var<Scalar>> queries(n_agents);
    for (int a = 0; a < n_agents; ++a) {
      if (out.agent_decoded(a)) queries[a] = initial_query(g, out.num_intentions);
    }
    for (int k = 0; k < iterations; ++k) {
      IterationOutput<Scalar> step;
      step.pred_trajectories.resize(n_agents);
      step.pred_logits.resize(n_agents);
      for (int a = 0; a < n_agents; ++a) {
        if (!out.agent_decoded(a)) continue;
        const Vec2 pos(agent_pose(a, 0), agent_pose(a, 1));
        auto pred = decode_prediction_iteration(
          k, queries[a], q_g[a], context.tokens, context.mask, out.intention_masks[a], pos);
        queries[a] = pred.query;
        step.pred_trajectories[a] = pred.trajectories;
        step.pred_logits[a] = pred.logits;
      }
      auto plan = decode_planning_iteration(k, queries[0], q_g[0], route, route_mask, out.intention_masks[0]);
      step.plan_trajectories = plan.trajectories;
      step.plan_logits = plan.logits;
      out.iterations.push_back(std::move(step));
    }
    return out;
  }

  const DecoderLayer<Scalar> & layer(int k) const { return layers_.at(k); }

private:
  void check_queries(const Var<Scalar> & q, const Var<Scalar> & q_g, const Mask & intention_mask) const
  {
    if (q.cols() != cfg_.dim || q_g.cols() != cfg_.dim || q.rows() != q_g.rows() ||
        intention_mask.size() != q.rows()) {
      throw Error("trajectory_decoder", "query shape mismatch");
    }
  }

  std::pair<Var<Scalar>, Var<Scalar>> split_head(const Var<Scalar> & head, const Vec2 & origin) const
  {
    const int t_f = cfg_.future_steps;
    Matrix<Scalar> anchor(1, 2 * t_f);
    for (int t = 0; t < t_f; ++t) {
      anchor(0, 2 * t) = static_cast<Scalar>(origin.x());
      anchor(0, 2 * t + 1) = static_cast<Scalar>(origin.y());
    }
    auto & g = head.graph();
    auto offsets = nn::scale(nn::slice_cols(head, 0, 2 * t_f), static_cast<Scalar>(cfg_.coordinate_scale));
    auto traj = nn::add_row(offsets, g.constant(anchor));
    auto logits = nn::reshape(nn::slice_cols(head, 2 * t_f, 1), 1, head.rows());
    return {traj, logits};
  }

  ModelConfig cfg_;
  nn::Mlp<Scalar> intent_mlp_;
  nn::Parameter<Scalar> * init_query_ = nullptr;
  std::vector<DecoderLayer<Scalar>> layers_;
};

}  // namespace int2plan::model
