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

#include "int2plan/config.hpp"

#include <fstream>
#include <sstream>

#include "int2plan/error.hpp"
#include "json.hpp"

namespace int2plan {

using nlohmann::json;

namespace {

constexpr const char * kModule = "training";

template <typename T>
void read(const json & j, const char * key, T & out)
{
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception & e) {
      throw Error(kModule, std::string("config field '") + key + "': " + e.what());
    }
  }
}

json model_to_json(const ModelConfig & m)
{
  return {
    {"dim", m.dim},
    {"heads", m.heads},
    {"t_h", m.history_steps},
    {"t_f", m.future_steps},
    {"n_q", m.num_intentions},
    {"k", m.iterations},
    {"d_r", m.route_interval},
    {"context_layers", m.context_layers},
    {"route_layers", m.route_layers},
    {"mlp_hidden", m.mlp_hidden},
    {"mlp_hidden_layers", m.mlp_hidden_layers},
    {"max_agents", m.max_agents},
    {"max_polylines", m.max_polylines},
    {"max_points", m.max_points},
    {"max_routes", m.max_routes},
    {"map_range", m.map_range},
    {"coordinate_scale", m.coordinate_scale},
    {"use_route_embedding", m.use_route_embedding},
    {"ego_intentions", m.ego_intentions == EgoIntentionMode::kRoute ? "route" : "cluster"}};
}

void model_from_json(const json & j, ModelConfig & m)
{
  read(j, "dim", m.dim);
  read(j, "heads", m.heads);
  read(j, "t_h", m.history_steps);
  read(j, "t_f", m.future_steps);
  read(j, "n_q", m.num_intentions);
  read(j, "k", m.iterations);
  read(j, "d_r", m.route_interval);
  read(j, "context_layers", m.context_layers);
  read(j, "route_layers", m.route_layers);
  read(j, "mlp_hidden", m.mlp_hidden);
  read(j, "mlp_hidden_layers", m.mlp_hidden_layers);
  read(j, "max_agents", m.max_agents);
  read(j, "max_polylines", m.max_polylines);
  read(j, "max_points", m.max_points);
  read(j, "max_routes", m.max_routes);
  read(j, "map_range", m.map_range);
  read(j, "coordinate_scale", m.coordinate_scale);
  read(j, "use_route_embedding", m.use_route_embedding);
  if (auto it = j.find("ego_intentions"); it != j.end()) {
    const auto mode = it->get<std::string>();
    if (mode == "route") m.ego_intentions = EgoIntentionMode::kRoute;
    else if (mode == "cluster") m.ego_intentions = EgoIntentionMode::kCluster;
    else throw Error(kModule, "ego_intentions must be 'route' or 'cluster'");
  }
}

}  // namespace

void ModelConfig::validate() const
{
  if (dim <= 0 || heads <= 0 || dim % heads != 0) throw Error(kModule, "dim must be divisible by heads");
  if (history_steps < 0 || future_steps < 1) throw Error(kModule, "t_h >= 0 and t_f >= 1 required");
  if (num_intentions < 1 || iterations < 1) throw Error(kModule, "n_q and k must be positive");
  if (!(route_interval > 0.0)) throw Error(kModule, "d_r must be positive");
  if (context_layers < 0 || route_layers < 0 || mlp_hidden < 1 || mlp_hidden_layers < 0) {
    throw Error(kModule, "layer counts must be non-negative");
  }
  if (max_agents < 0 || max_polylines < 1 || max_points < 2 || max_routes < 1) {
    throw Error(kModule, "tensor capacities must be positive");
  }
  if (!(coordinate_scale > 0.0)) throw Error(kModule, "coordinate_scale must be positive");
}

void TrainConfig::validate() const
{
  model.validate();
  if (epochs < 1 || batch_size < 1) throw Error(kModule, "epochs and batch_size must be positive");
  if (learning_rate < 0.0 || weight_decay < 0.0) throw Error(kModule, "negative learning rate or decay");
  if (lr_schedule != "constant" && lr_schedule != "cosine" && lr_schedule != "step") {
    throw Error(kModule, "unknown lr_schedule '" + lr_schedule + "'");
  }
  if (val_fraction < 0.0 || val_fraction >= 1.0) throw Error(kModule, "val_fraction must be in [0, 1)");
}

TrainConfig profile_config(const std::string & name)
{
  TrainConfig c;
  c.profile = name;
  if (name == "private") {
    c.model.history_steps = 15;
    c.model.future_steps = 50;
  } else if (name == "benchmark") {
    c.model.history_steps = 20;
    c.model.future_steps = 80;
  } else if (name == "micro") {
    auto & m = c.model;
    m.dim = 32;
    m.heads = 4;
    m.history_steps = 10;
    m.future_steps = 20;
    m.num_intentions = 16;
    m.iterations = 6;
    m.context_layers = 1;
    m.route_layers = 1;
    m.mlp_hidden = 64;
    m.max_agents = 4;
    m.max_polylines = 12;
    m.max_points = 9;
    m.max_routes = 8;
    m.map_range = 100.0;
    c.learning_rate = 3e-3;
    c.weight_decay = 0.0;
    c.epochs = 200;
    c.batch_size = 10;
  } else {
    throw Error(kModule, "unknown profile '" + name + "'");
  }
  return c;
}

TrainConfig train_config_from_json(const std::string & text)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error & e) {
    throw Error(kModule, std::string("config parse error: ") + e.what());
  }
  std::string profile = "private";
  read(j, "profile", profile);
  TrainConfig c = profile_config(profile);
  if (auto it = j.find("model"); it != j.end()) model_from_json(*it, c.model);
  model_from_json(j, c.model);
  read(j, "learning_rate", c.learning_rate);
  read(j, "weight_decay", c.weight_decay);
  read(j, "beta1", c.beta1);
  read(j, "beta2", c.beta2);
  read(j, "eps", c.eps);
  read(j, "lr_schedule", c.lr_schedule);
  read(j, "lr_step_epochs", c.lr_step_epochs);
  read(j, "epochs", c.epochs);
  read(j, "batch_size", c.batch_size);
  read(j, "seed", c.seed);
  read(j, "grad_clip", c.grad_clip);
  read(j, "prediction_loss", c.prediction_loss);
  read(j, "supervise_ego_prediction", c.supervise_ego_prediction);
  read(j, "val_fraction", c.val_fraction);
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::string & path)
{
  std::ifstream in(path);
  if (!in) throw Error(kModule, "cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return train_config_from_json(buffer.str());
}

std::string train_config_to_json(const TrainConfig & c)
{
  json j = {
    {"profile", c.profile},
    {"model", model_to_json(c.model)},
    {"learning_rate", c.learning_rate},
    {"weight_decay", c.weight_decay},
    {"beta1", c.beta1},
    {"beta2", c.beta2},
    {"eps", c.eps},
    {"lr_schedule", c.lr_schedule},
    {"lr_step_epochs", c.lr_step_epochs},
    {"epochs", c.epochs},
    {"batch_size", c.batch_size},
    {"seed", c.seed},
    {"grad_clip", c.grad_clip},
    {"prediction_loss", c.prediction_loss},
    {"supervise_ego_prediction", c.supervise_ego_prediction},
    {"val_fraction", c.val_fraction}};
  return j.dump();
}

}  // namespace int2plan
