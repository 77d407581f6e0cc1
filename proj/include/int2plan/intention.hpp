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
#include <string_view>
#include <span>
#include <vector>

#include "int2plan/scene.hpp"

namespace int2plan {

enum class IntentionSource { kRoutePrimary, kRouteSecondary, kCluster };

std::string_view to_string(IntentionSource source);

struct IntentionPoint
{
  Vec2 position = Vec2::Zero();
  IntentionSource source = IntentionSource::kCluster;
  bool valid = false;
};

/// Exactly N_q slots for one agent. Padding slots repeat the last valid point
/// with valid=false.
using IntentionRow = std::vector<IntentionPoint>;

/// Row 0 is the ego.
struct IntentionSet
{
  std::vector<IntentionRow> rows;

  int num_agents() const { return static_cast<int>(rows.size()); }
  int num_intentions() const { return rows.empty() ? 0 : static_cast<int>(rows.front().size()); }
};

/// Points at arc lengths interval, 2*interval, ... up to the polyline length.
std::vector<Vec2> resample_polyline(const Polyline & polyline, double interval);

/// Ego intentions: primary-route points first, then secondary, truncated or
/// padded to `num_intentions`.
IntentionRow sample_route_intentions(const RouteSet & routes, double interval, int num_intentions);

struct ClusterResult
{
  IntentionRow centers;
  /// Sum of squared distances to the assigned center after each Lloyd step.
  std::vector<double> objective_history;
};

/// Seeded k-means++ initialisation followed by Lloyd iterations (at most 50,
/// or until the relative objective change drops below 1e-6).
ClusterResult cluster_intentions(
  std::span<const Vec2> endpoints, int num_intentions, std::uint64_t seed);

/// Index of the valid slot closest to `endpoint`, lowest index on ties.
int select_positive_intention(const IntentionRow & row, const Vec2 & endpoint);

/// Pads `points` to `num_intentions` slots; extra points are dropped.
IntentionRow pad_intentions(std::vector<IntentionPoint> points, int num_intentions);

/// Maps agent-centric cluster centers into the scene frame at the agent's pose.
IntentionRow place_intentions(const IntentionRow & centers, const Vec2 & position, double heading);

/// Endpoint of the last valid future point expressed in the agent's frame at t0.
std::optional<Vec2> agent_centric_endpoint(const AgentHistory & agent, const FutureTrack & future);

}  // namespace int2plan
