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

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace int2plan {

using Vec2 = Eigen::Vector2d;
using RowMatrixXd =
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, 1>;

inline constexpr double kStepSeconds = 0.1;

enum class AgentKind { kCar, kBus, kTruck, kCyclist, kTricycle, kPedestrian, kRoadblock };
inline constexpr int kNumAgentKinds = 7;

enum class PolylineKind { kLaneCenter, kLaneDivider, kCrosswalk, kRoute };
inline constexpr int kNumPolylineKinds = 4;

enum class Frame { kGlobal, kEgo };

std::string_view to_string(AgentKind kind);
std::string_view to_string(PolylineKind kind);
AgentKind parse_agent_kind(std::string_view name);
PolylineKind parse_polyline_kind(std::string_view name);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

struct AgentState
{
  int t = 0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  bool valid = false;

  Vec2 position() const { return {x, y}; }
  Vec2 velocity() const { return {vx, vy}; }
  double speed() const { return std::hypot(vx, vy); }
};

struct Footprint
{
  double length = 4.5;
  double width = 2.0;
};

struct AgentHistory
{
  std::int64_t id = 0;
  AgentKind kind = AgentKind::kCar;
  /// Oldest first; back() is the state at t0.
  std::vector<AgentState> states;
  Footprint footprint;

  const AgentState & current() const { return states.back(); }
};

struct Polyline
{
  std::int64_t id = 0;
  PolylineKind kind = PolylineKind::kLaneCenter;
  std::vector<Vec2> points;

  double length() const;
};

struct RouteSet
{
  std::vector<Polyline> primary;
  std::vector<Polyline> secondary;

  std::size_t size() const { return primary.size() + secondary.size(); }
};

struct FuturePoint
{
  double x = 0.0;
  double y = 0.0;
  bool valid = false;

  Vec2 position() const { return {x, y}; }
};

using FutureTrack = std::vector<FuturePoint>;

struct Scenario
{
  std::string id;
  double dt = kStepSeconds;
  double speed_limit = 15.0;
  Frame frame = Frame::kGlobal;
  AgentHistory ego;
  std::vector<AgentHistory> agents;
  std::vector<Polyline> map;
  RouteSet routes;
  std::map<std::int64_t, FutureTrack> gt_futures;

  /// t_h: number of history steps before t0.
  int history_steps() const { return static_cast<int>(ego.states.size()) - 1; }
  /// t_f: number of future steps.
  int future_steps() const;
  const FutureTrack & future_of(std::int64_t agent_id) const;
};

/// Parses scenario JSON and validates every invariant. Throws Error("scene_model")
/// with a field path or line/column on failure.
Scenario load_scenario(std::string_view content);
Scenario load_scenario_file(const std::string & path);
std::string save_scenario(const Scenario & scenario);
void save_scenario_file(const Scenario & scenario, const std::string & path);

/// Throws Error("scene_model") naming the first violated invariant.
void validate_scenario(const Scenario & scenario);

/// Rigid transform taking global coordinates into a frame whose origin is
/// `origin` and whose x-axis points along `heading`.
struct RigidTransform
{
  Vec2 origin = Vec2::Zero();
  double heading = 0.0;

  Vec2 apply(const Vec2 & p) const;
  Vec2 rotate(const Vec2 & v) const;
  double apply_heading(double h) const { return wrap_angle(h - heading); }
  RigidTransform inverse() const;
};

Scenario transform_scenario(const Scenario & scenario, const RigidTransform & tf);
Scenario normalize_to_ego_frame(const Scenario & scenario);
Scenario crop_map(const Scenario & scenario, double range_m);

struct TensorizeOptions
{
  int history_steps = 15;
  int future_steps = 50;
  int max_agents = 32;
  int max_polylines = 64;
  int max_points = 20;
  int max_routes = 16;
};

/// Per-step agent features: x, y, cos h, sin h, vx, vy, one-hot kind, valid.
inline constexpr int kAgentFeatureDim = 6 + kNumAgentKinds + 1;
/// Per-point polyline features: x, y, unit direction to next point, one-hot kind.
inline constexpr int kPolylineFeatureDim = 4 + kNumPolylineKinds;

/// Fixed-shape model inputs. Element-major flattening: row (e * steps + s)
/// holds step s of element e.
struct SceneTensors
{
  int num_agent_slots = 0;  // max_agents + 1, slot 0 is the ego
  int history_len = 0;      // t_h + 1
  int future_len = 0;       // t_f
  int num_map_slots = 0;
  int num_route_slots = 0;
  int points_per_polyline = 0;

  RowMatrixXd agent_features;  // [slots * history_len, kAgentFeatureDim]
  BoolArray agent_step_mask;   // [slots * history_len]
  BoolArray agent_mask;        // [slots]
  std::vector<std::int64_t> agent_ids;
  std::vector<int> agent_source;     // index into scenario.agents, -1 for ego/padding
  std::vector<AgentKind> agent_kinds;
  std::vector<Footprint> agent_footprints;
  RowMatrixXd agent_pose;      // [slots, 3]: x, y, heading at t0

  RowMatrixXd map_features;    // [map_slots * points, kPolylineFeatureDim]
  BoolArray map_point_mask;
  BoolArray map_mask;
  std::vector<int> map_source;

  RowMatrixXd route_features;  // [route_slots * points, kPolylineFeatureDim]
  BoolArray route_point_mask;
  BoolArray route_mask;
  BoolArray route_is_primary;

  RowMatrixXd gt_future;       // [slots * future_len, 2]
  BoolArray gt_future_mask;    // [slots * future_len]
};

/// Requires frame == EGO. Elements beyond the configured capacities are
/// dropped keeping those nearest the ego (ties by ascending id).
SceneTensors tensorize(const Scenario & scenario, const TensorizeOptions & options);

}  // namespace int2plan
