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

#include <cstdint>
#include <string>

#include "int2plan/scene.hpp"

namespace int2plan {

enum class EgoIntentionMode { kRoute, kCluster };

struct ModelConfig
{
  int dim = 128;
  int heads = 8;
  int history_steps = 15;  // t_h
  int future_steps = 50;   // t_f
  int num_intentions = 64; // N_q
  int iterations = 6;      // K
  double route_interval = 4.0;  // d_r, meters
  int context_layers = 3;
  int route_layers = 1;
  int mlp_hidden = 128;
  int mlp_hidden_layers = 1;
  int max_agents = 32;
  int max_polylines = 64;
  int max_points = 20;
  int max_routes = 16;
  double map_range = 200.0;
  /// Metres per network unit for positions entering and leaving the model.
  double coordinate_scale = 10.0;
  bool use_route_embedding = true;
  EgoIntentionMode ego_intentions = EgoIntentionMode::kRoute;

  TensorizeOptions tensorize_options() const
  {
    return {history_steps, future_steps, max_agents, max_polylines, max_points, max_routes};
  }
  void validate() const;
};

struct TrainConfig
{
  std::string profile = "private";
  ModelConfig model;
  double learning_rate = 1e-4;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// "constant", "cosine" or "step" (x0.5 every lr_step_epochs).
  std::string lr_schedule = "constant";
  int lr_step_epochs = 10;
  int epochs = 30;
  int batch_size = 96;
  std::uint64_t seed = 0;
  double grad_clip = 5.0;
  bool prediction_loss = true;
  bool supervise_ego_prediction = true;
  /// Fraction of scenarios held out for validation (0 = validate on train).
  double val_fraction = 0.0;

  void validate() const;
};

/// Known profiles: "private" (t_h 15, t_f 50), "benchmark" (t_h 20, t_f 80)
/// and "micro", a small model for tests and desk experiments.
TrainConfig profile_config(const std::string & name);

/// Starts from the profile named by the "profile" key (default "private")
/// and applies every other key on top.
TrainConfig train_config_from_json(const std::string & text);
TrainConfig load_train_config(const std::string & path);
std::string train_config_to_json(const TrainConfig & config);

}  // namespace int2plan
