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
#include <string_view>
#include <vector>

#include "int2plan/scene.hpp"

namespace int2plan {

enum class SimulationMode { kOpenLoop, kNonReactive, kReactive };

std::string_view to_string(SimulationMode mode);
/// Accepts "open", "nonreactive", "reactive" (and the enum spellings).
SimulationMode parse_simulation_mode(std::string_view name);

struct EgoRecord
{
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double v = 0.0;

  Vec2 position() const { return {x, y}; }
};

struct AgentSnapshot
{
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double v = 0.0;
  bool valid = false;

  Vec2 position() const { return {x, y}; }
};

struct AgentTrack
{
  std::int64_t id = 0;
  Footprint footprint;
  /// One snapshot per rollout step, aligned with Rollout::ego.
  std::vector<AgentSnapshot> states;
};

struct ReplanRecord
{
  double t = 0.0;
  int step = 0;
  /// Plan actually handed to the controller, scenario frame.
  std::vector<Vec2> plan;
  /// Planner output before post-processing (equal to `plan` when disabled).
  std::vector<Vec2> raw_plan;
  double confidence = 1.0;
  bool postprocessed = false;
  bool feasible = true;
};

struct Rollout
{
  std::string scenario_id;
  SimulationMode mode = SimulationMode::kNonReactive;
  double dt = kStepSeconds;
  Footprint ego_footprint;
  /// ego[0] is the state at t0.
  std::vector<EgoRecord> ego;
  std::vector<AgentTrack> agents;
  std::vector<ReplanRecord> replans;
  bool aborted = false;
  std::string abort_reason;

  int steps() const { return static_cast<int>(ego.size()) - 1; }
};

std::string rollout_to_json(const Rollout & rollout);

}  // namespace int2plan
