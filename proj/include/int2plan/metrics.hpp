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

#include <Eigen/Core>

#include "int2plan/rollout.hpp"
#include "int2plan/scene.hpp"

namespace int2plan {

using Trajectory = Eigen::MatrixX2d;

/// Mean point distance over valid steps. Throws on an empty mask.
double ade(const Trajectory & pred, const Trajectory & gt, const BoolArray & mask);
/// Point distance at the last valid step. Throws on an empty mask.
double fde(const Trajectory & pred, const Trajectory & gt, const BoolArray & mask);

enum class DisplacementMetric { kAde, kFde };

/// Minimum metric over the `k` highest-scoring valid modes (all when fewer).
/// Score ties rank the lower mode index first.
double min_over_top_k(
  const std::vector<Trajectory> & modes, const Eigen::VectorXd & scores, const BoolArray & valid_modes,
  const Trajectory & gt, const BoolArray & mask, int k, DisplacementMetric metric);

struct ScoreOptions
{
  double progress_weight = 0.5;
  double comfort_weight = 0.25;
  double speed_weight = 0.25;
  double corridor_half_width = 3.5;
  double max_accel = 4.0;
  double max_jerk = 10.0;
};

struct ScoreCard
{
  bool collision = false;
  bool drivable_violation = false;
  double progress_ratio = 0.0;
  double comfort = 0.0;
  double speed_compliance = 0.0;
  double composite = 0.0;
};

/// Simplified closed-loop score. `scenario` must be in the rollout's frame.
ScoreCard score_rollout(const Rollout & rollout, const Scenario & scenario, const ScoreOptions & options = {});

/// Primary route polylines joined into one, shared joints dropped.
std::vector<Vec2> primary_route_points(const RouteSet & routes);

struct ScoreRow
{
  std::string scenario_id;
  SimulationMode mode = SimulationMode::kNonReactive;
  ScoreCard card;
};

/// `scenario_id,mode,collision,drivable,progress,comfort,speed,composite`,
/// one row per card plus a final "mean" row.
std::string score_csv(const std::vector<ScoreRow> & rows);

}  // namespace int2plan
