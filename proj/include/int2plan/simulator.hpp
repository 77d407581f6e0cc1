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
#include <span>
#include <vector>

#include "int2plan/postprocess.hpp"
#include "int2plan/rollout.hpp"
#include "int2plan/scene.hpp"

namespace int2plan {

struct EgoDynamicState
{
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double v = 0.0;
  double wheelbase = 2.8;
};

struct IdmParams
{
  double desired_speed = 10.0;  // v0
  double min_gap = 2.0;         // s0
  double time_headway = 1.5;    // T
  double max_accel = 1.5;       // a_max
  double comfort_decel = 2.0;   // b
  double exponent = 4.0;        // delta

  void validate() const;
};

/// IDM acceleration clamped to [-2b, a_max]. `gap` is +inf without a leader;
/// a non-positive gap returns -2b.
double idm_accel(double v, double gap, double closing_speed, const IdmParams & params);

/// Explicit Euler step of the kinematic bicycle (position first, then
/// heading, then speed clamped at zero).
EgoDynamicState step_bicycle(const EgoDynamicState & state, double accel, double steer, double dt);

struct TrackerParams
{
  double min_lookahead = 3.0;
  double lookahead_gain = 1.0;  // seconds
  double max_steer = 0.6;
  double max_accel = 3.0;
  double max_decel = 6.0;
  double speed_gain = 2.0;
  double position_gain = 1.0;
};

struct ControlCommand
{
  double accel = 0.0;
  double steer = 0.0;
  bool steer_saturated = false;
};

/// Pure pursuit toward the point one lookahead distance along the plan, with
/// speed and along-track position feedback against the plan's timing.
/// plan[i] is the desired position (i + 1) * dt from now.
ControlCommand track_trajectory(
  const EgoDynamicState & state, std::span<const Vec2> plan, double dt, const TrackerParams & params = {});

struct PlannerOutput
{
  /// Ego-frame positions at dt, 2 dt, ...
  std::vector<Vec2> trajectory;
  double confidence = 1.0;
  /// Top-1 ego-frame forecasts used by post-processing.
  std::vector<AgentPrediction> predictions;
};

/// Receives an ego-frame observation whose history ends at the current step.
using Planner = std::function<PlannerOutput(const Scenario & observation)>;

struct SimulationConfig
{
  SimulationMode mode = SimulationMode::kNonReactive;
  double horizon_s = 15.0;
  double replan_period_s = 1.0;
  IdmParams idm;
  TrackerParams tracker;
  double wheelbase = 2.8;
  bool postprocess = false;
  RefineParams refine;
};

/// Runs one rollout of `scenario` (GLOBAL frame). The horizon is clamped to
/// the logged future. A throwing planner aborts the rollout, which is
/// returned partially filled with `aborted` set.
Rollout rollout_closed_loop(const Scenario & scenario, const Planner & planner, const SimulationConfig & config);

/// Rollout that reproduces the logged ego and agents over `steps` steps.
Rollout log_rollout(const Scenario & scenario, int steps);


}  // namespace int2plan
