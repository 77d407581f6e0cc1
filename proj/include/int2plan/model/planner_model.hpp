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

#include <memory>

#include "int2plan/model/decoder.hpp"
#include "int2plan/model/encoders.hpp"

namespace int2plan::model {

/// Context encoder + route encoder + trajectory generator sharing one
/// parameter store.
template <typename Scalar>
class PlannerModel
{
public:
  PlannerModel(const ModelConfig & cfg, std::uint64_t seed)
  : cfg_(cfg), store_(std::make_unique<nn::ParameterStore<Scalar>>())
  {
    cfg.validate();
    nn::Rng rng(seed);
    context_encoder_ = ContextEncoder<Scalar>(*store_, "context_encoder", cfg, rng);
    route_encoder_ = RouteEncoder<Scalar>(*store_, "route_encoder", cfg, rng);
    decoder_ = TrajectoryDecoder<Scalar>(*store_, "decoder", cfg, rng);
  }

  MultiModalOutput<Scalar> forward(
    Graph<Scalar> & g, const SceneTensors & tensors, const IntentionSet & intentions, int iterations = -1) const
  {
    if (iterations < 0) iterations = cfg_.iterations;
    if (intentions.num_agents() != tensors.num_agent_slots) {
      throw Error("trajectory_decoder", "intention rows do not match agent slots");
    }
    auto context = context_encoder_.encode(g, tensors);
    const Mask agent_mask = tensors.agent_mask;
    if (cfg_.use_route_embedding) {
      auto ego = nn::slice_rows(context.tokens, context.ego_token, 1);
      auto route = route_encoder_.encode(g, ego, tensors);
      return decoder_.run(g, context, route.tokens, route.mask, intentions, tensors.agent_pose, agent_mask, iterations);
    }
    return decoder_.run(g, context, context.tokens, context.mask, intentions, tensors.agent_pose, agent_mask, iterations);
  }

  const ModelConfig & config() const { return cfg_; }
  nn::ParameterStore<Scalar> & parameters() { return *store_; }
  const nn::ParameterStore<Scalar> & parameters() const { return *store_; }
  const ContextEncoder<Scalar> & context_encoder() const { return context_encoder_; }
  const RouteEncoder<Scalar> & route_encoder() const { return route_encoder_; }
  const TrajectoryDecoder<Scalar> & decoder() const { return decoder_; }

private:
  ModelConfig cfg_;
  std::unique_ptr<nn::ParameterStore<Scalar>> store_;
  ContextEncoder<Scalar> context_encoder_;
  RouteEncoder<Scalar> route_encoder_;
  TrajectoryDecoder<Scalar> decoder_;
};

}  // namespace int2plan::model
