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
#include <optional>
#include <span>
#include <vector>

#include "int2plan/scene.hpp"

namespace int2plan {

struct FrenetPoint
{
  double s = 0.0;  // arc length, extrapolated past either end
  double l = 0.0;  // lateral offset, positive to the left
};

/// Densified primary-route centerline.
class ReferenceLine
{
public:
  ReferenceLine() = default;
  explicit ReferenceLine(std::vector<Vec2> points);

  const std::vector<Vec2> & points() const { return points_; }
  const std::vector<double> & arc_length() const { return arc_; }
  double length() const { return arc_.empty() ? 0.0 : arc_.back(); }

  /// Nearest-point projection. With `hint_s`, only segments within a window
  /// around the hint are searched, which keeps self-intersecting lines
  /// continuous from one query to the next.
  FrenetPoint to_frenet(const Vec2 & p, std::optional<double> hint_s = std::nullopt) const;
  Vec2 from_frenet(double s, double l) const;

private:
  std::size_t segment_at(double s) const;

  std::vector<Vec2> points_;
  std::vector<double> arc_;
};

/// Concatenated primary polylines resampled every `spacing` metres, both
/// endpoints included.
ReferenceLine build_reference_line(const RouteSet & routes, double spacing = 0.5);

/// Top-1 forecast of one agent, aligned with the plan timebase.
struct AgentPrediction
{
  std::int64_t id = 0;
  std::vector<Vec2> points;
  Footprint footprint;
  double initial_heading = 0.0;
};

struct Conflict
{
  int step = 0;
  std::int64_t agent_id = 0;
  double depth = 0.0;
};

/// Per-step box overlap of the ego (inflated by `margin`) against every
/// prediction. Sorted by step, then agent order. Throws on a timebase mismatch.
std::vector<Conflict> check_collisions(
  std::span<const Vec2> plan, std::span<const double> headings, const Footprint & ego,
  std::span<const AgentPrediction> predictions, double margin = 0.0);

struct RefineParams
{
  double lateral_limit = 3.0;
  int max_iterations = 10;
  /// Clearance kept around the ego footprint while resolving conflicts.
  double safety_margin = 1.0;
  /// Backoff distance is min_backoff + time_headway * speed at the conflict.
  double time_headway = 1.0;
  double min_backoff = 1.0;
  double smoothing_weight = 4.0;
  double dt = kStepSeconds;
};

struct RefineResult
{
  std::vector<Vec2> plan;
  bool feasible = true;
  /// The reference ended before the plan; only the lateral clamp ran.
  bool clamp_only = false;
  int iterations = 0;
  /// Conflict count before refinement and after every accepted iteration.
  std::vector<int> conflict_counts;
};

/// Clamps lateral offsets, then backs off the speed profile ahead of the
/// earliest conflict until none remain, then smooths the profile. `start` is
/// the ego position at the plan's time zero and `start_heading` its heading.
RefineResult refine_trajectory(
  std::span<const Vec2> plan, const ReferenceLine & reference, std::span<const AgentPrediction> predictions,
  const Footprint & ego, const RefineParams & params = {}, const Vec2 & start = Vec2::Zero(),
  double start_heading = 0.0);

/// Lateral clamp alone (idempotent).
std::vector<Vec2> clamp_lateral(std::span<const Vec2> plan, const ReferenceLine & reference, double limit);

}  // namespace int2plan
