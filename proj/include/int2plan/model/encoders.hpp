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

#include "int2plan/config.hpp"
#include "int2plan/nn/layers.hpp"
#include "int2plan/scene.hpp"

namespace int2plan::model {

using nn::Graph;
using nn::Mask;
using nn::Matrix;
using nn::Var;

struct TokenRef
{
  enum class Kind { kAgent, kMap, kRoute };
  Kind kind = Kind::kAgent;
  int slot = 0;
};

template <typename Scalar>
struct ContextEmbedding
{
  Var<Scalar> tokens;  // [agent slots + map slots, dim]
  Mask mask;
  std::vector<TokenRef> index;
  int ego_token = 0;
  /// Pooled element features before attention (the φ_agg outputs).
  Var<Scalar> aggregated;
};

template <typename Scalar>
struct RouteEmbedding
{
  Var<Scalar> tokens;  // [1 + route slots, dim], token 0 is the ego
  Mask mask;
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> scaled_features(const RowMatrixXd & features, std::initializer_list<int> metric_cols, double scale)
{
  Matrix<Scalar> m = features.cast<Scalar>();
  for (int c : metric_cols) m.col(c) /= static_cast<Scalar>(scale);
  return m;
}

inline Mask to_mask(const BoolArray & b) { return b; }

}  // namespace detail

/// PointNet-style aggregation: shared MLP on every step/point, then masked
/// max-pool per element. Elements with a false mask become zero tokens.
template <typename Scalar>
class PolylineAggregator
{
public:
  PolylineAggregator() = default;
  PolylineAggregator(
    nn::ParameterStore<Scalar> & store, const std::string & prefix, int in, const ModelConfig & cfg, nn::Rng & rng)
  : mlp_(store, prefix, in, cfg.mlp_hidden, cfg.dim, cfg.mlp_hidden_layers, rng)
  {
  }

  Var<Scalar> operator()(
    Graph<Scalar> & g, const Matrix<Scalar> & features, int steps, const Mask & step_mask,
    const Mask & element_mask) const
  {
    auto h = mlp_(g.constant(features));
    auto pooled = nn::max_pool_groups(h, steps, step_mask);
    return nn::mask_rows(pooled, element_mask);
  }

private:
  nn::Mlp<Scalar> mlp_;
};

/// C_em = SelfAttn(φ_agg([agents, map])) with a learned type embedding per
/// token kind.
template <typename Scalar>
class ContextEncoder
{
public:
  ContextEncoder() = default;
  ContextEncoder(nn::ParameterStore<Scalar> & store, const std::string & prefix, const ModelConfig & cfg, nn::Rng & rng)
  : cfg_(cfg),
    agent_agg_(store, prefix + ".agent_agg", kAgentFeatureDim, cfg, rng),
    map_agg_(store, prefix + ".map_agg", kPolylineFeatureDim, cfg, rng),
    type_embedding_(&store.add(
      prefix + ".type_embedding", {2, std::uint64_t(cfg.dim)}, nn::normal_init<Scalar>(2, cfg.dim, 0.02, rng)))
  {
    const nn::AttentionConfig attn{cfg.dim, cfg.heads};
    for (int i = 0; i < cfg.context_layers; ++i) {
      layers_.emplace_back(store, prefix + ".layers." + std::to_string(i), attn, rng);
    }
  }

  ContextEmbedding<Scalar> encode(Graph<Scalar> & g, const SceneTensors & t) const
  {
    const Mask agent_mask = detail::to_mask(t.agent_mask);
    const Mask map_mask = detail::to_mask(t.map_mask);
    auto agents = agent_agg_(
      g, detail::scaled_features<Scalar>(t.agent_features, {0, 1, 4, 5}, cfg_.coordinate_scale),
      t.history_len, detail::to_mask(t.agent_step_mask), agent_mask);
    auto map = map_agg_(
      g, detail::scaled_features<Scalar>(t.map_features, {0, 1}, cfg_.coordinate_scale),
      t.points_per_polyline, detail::to_mask(t.map_point_mask), map_mask);
    return encode_tokens(g, agents, map, agent_mask, map_mask);
  }

  /// Attention stage on already aggregated agent and map tokens.
  ContextEmbedding<Scalar> encode_tokens(
    Graph<Scalar> & g, const Var<Scalar> & agents, const Var<Scalar> & map, const Mask & agent_mask,
    const Mask & map_mask) const
  {
    ContextEmbedding<Scalar> out;
    const auto n_agents = agents.rows();
    const auto n_map = map.rows();
    out.mask.resize(n_agents + n_map);
    out.mask << agent_mask, map_mask;
    if (!out.mask.any()) throw Error("encoders", "all context tokens are masked");
    for (Eigen::Index i = 0; i < n_agents; ++i) out.index.push_back({TokenRef::Kind::kAgent, int(i)});
    for (Eigen::Index i = 0; i < n_map; ++i) out.index.push_back({TokenRef::Kind::kMap, int(i)});

    auto type = g.parameter(*type_embedding_);
    auto agent_tokens = nn::add_row(agents, nn::slice_rows(type, 0, 1));
    auto map_tokens = nn::add_row(map, nn::slice_rows(type, 1, 1));
    out.aggregated = nn::concat_rows<Scalar>({agents, map});
    auto x = nn::mask_rows(nn::concat_rows<Scalar>({agent_tokens, map_tokens}), out.mask);
    for (const auto & layer : layers_) x = layer.self_attend(x, out.mask);
    out.tokens = nn::mask_rows(x, out.mask);
    return out;
  }

  const std::vector<nn::AttentionBlock<Scalar>> & layers() const { return layers_; }
  nn::Parameter<Scalar> & type_embedding() const { return *type_embedding_; }

private:
  ModelConfig cfg_;
  PolylineAggregator<Scalar> agent_agg_;
  PolylineAggregator<Scalar> map_agg_;
  nn::Parameter<Scalar> * type_embedding_ = nullptr;
  std::vector<nn::AttentionBlock<Scalar>> layers_;
};

/// R_em = SelfAttn([C_em^EA, φ_agg(routes)]). Only the ego token and route
/// tokens take part.
template <typename Scalar>
class RouteEncoder
{
public:
  RouteEncoder() = default;
  RouteEncoder(nn::ParameterStore<Scalar> & store, const std::string & prefix, const ModelConfig & cfg, nn::Rng & rng)
  : cfg_(cfg), route_agg_(store, prefix + ".route_agg", kPolylineFeatureDim, cfg, rng)
  {
    const nn::AttentionConfig attn{cfg.dim, cfg.heads};
    for (int i = 0; i < cfg.route_layers; ++i) {
      layers_.emplace_back(store, prefix + ".layers." + std::to_string(i), attn, rng);
    }
  }

  RouteEmbedding<Scalar> encode(Graph<Scalar> & g, const Var<Scalar> & ego_context, const SceneTensors & t) const
  {
    const Mask route_mask = detail::to_mask(t.route_mask);
    if (!route_mask.any()) throw Error("encoders", "no valid route tokens");
    auto routes = route_agg_(
      g, detail::scaled_features<Scalar>(t.route_features, {0, 1}, cfg_.coordinate_scale),
      t.points_per_polyline, detail::to_mask(t.route_point_mask), route_mask);
    return encode_tokens(ego_context, routes, route_mask);
  }

  RouteEmbedding<Scalar> encode_tokens(
    const Var<Scalar> & ego_context, const Var<Scalar> & routes, const Mask & route_mask) const
  {
    if (ego_context.rows() != 1) throw Error("encoders", "ego context must be a single token");
    RouteEmbedding<Scalar> out;
    out.mask.resize(1 + route_mask.size());
    out.mask << true, route_mask;
    auto x = nn::concat_rows<Scalar>({ego_context, routes});
    for (const auto & layer : layers_) x = layer.self_attend(x, out.mask);
    out.tokens = nn::mask_rows(x, out.mask);
    return out;
  }

  const std::vector<nn::AttentionBlock<Scalar>> & layers() const { return layers_; }

private:
  ModelConfig cfg_;
  PolylineAggregator<Scalar> route_agg_;
  std::vector<nn::AttentionBlock<Scalar>> layers_;
};

}  // namespace int2plan::model
