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

#include "int2plan/synthetic.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "int2plan/error.hpp"

namespace int2plan {

namespace {

constexpr double kLaneWidth = 3.5;
constexpr double kSegmentLength = 20.0;
constexpr double kPointSpacing = 2.5;

/// Arc-length parameterised path.
class Path
{
public:
  explicit Path(std::vector<Vec2> pts) : pts_(std::move(pts)), arc_(pts_.size(), 0.0)
  {
    for (std::size_t i = 1; i < pts_.size(); ++i) arc_[i] = arc_[i - 1] + (pts_[i] - pts_[i - 1]).norm();
  }

  double length() const { return arc_.back(); }

  /// Position and heading at arc length s, extrapolated linearly past both ends.
  std::pair<Vec2, double> at(double s) const
  {
    std::size_t j = 0;
    while (j + 2 < pts_.size() && arc_[j + 1] <= s) ++j;
    const Vec2 d = pts_[j + 1] - pts_[j];
    const double len = arc_[j + 1] - arc_[j];
    return {pts_[j] + ((s - arc_[j]) / len) * d, std::atan2(d.y(), d.x())};
  }

  /// Points every `spacing` metres between arc lengths a and b (inclusive).
  std::vector<Vec2> sample(double a, double b, double spacing) const
  {
    std::vector<Vec2> out;
    const int n = static_cast<int>(std::floor((b - a) / spacing + 1e-9));
    for (int i = 0; i <= n; ++i) out.push_back(at(a + i * spacing).first);
    if (b - (a + n * spacing) > 1e-6) out.push_back(at(b).first);
    return out;
  }

private:
  std::vector<Vec2> pts_;
  std::vector<double> arc_;
};

Path straight_path(const Vec2 & from, double heading, double length)
{
  const Vec2 dir(std::cos(heading), std::sin(heading));
  return Path({from, from + length * dir});
}

/// Splits [a, b] of `path` into 20 m polylines with a point every 2.5 m.
std::vector<Polyline> segments(const Path & path, double a, double b, PolylineKind kind, std::int64_t & next_id)
{
  std::vector<Polyline> out;
  for (double s = a; s < b - 1e-6; s += kSegmentLength) {
    Polyline pl;
    pl.id = next_id++;
    pl.kind = kind;
    pl.points = path.sample(s, std::min(b, s + kSegmentLength), kPointSpacing);
    if (pl.points.size() >= 2) out.push_back(std::move(pl));
  }
  return out;
}

/// Samples per-step arc lengths s[i] for steps -t_h..t_f into a history and
/// a GT future.
void fill_track(
  const Path & path, const std::vector<double> & s, int t_h, AgentHistory & agent, FutureTrack & future,
  double dt)
{
  agent.states.clear();
  future.clear();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto [p, h] = path.at(s[i]);
    const int step = static_cast<int>(i) - t_h;
    if (step <= 0) {
      // Velocity by central difference where possible.
      const std::size_t lo = i == 0 ? 0 : i - 1;
      const std::size_t hi = std::min(s.size() - 1, i + 1);
      const double v = (s[hi] - s[lo]) / (dt * static_cast<double>(hi - lo));
      AgentState st;
      st.t = static_cast<int>(i);
      st.x = p.x();
      st.y = p.y();
      st.heading = wrap_angle(h);
      st.vx = v * std::cos(h);
      st.vy = v * std::sin(h);
      st.valid = true;
      agent.states.push_back(st);
    } else {
      future.push_back({p.x(), p.y(), true});
    }
  }
}

std::vector<double> constant_speed(double s0, double v, int t_h, int t_f, double dt)
{
  std::vector<double> s;
  for (int i = -t_h; i <= t_f; ++i) s.push_back(s0 + v * i * dt);
  return s;
}

struct Builder
{
  Scenario scene;
  std::int64_t next_polyline = 1;
  std::int64_t next_agent = 100;
  int t_h = 0;
  int t_f = 0;

  void add_agent(AgentKind kind, const Path & path, const std::vector<double> & s, Footprint fp = {})
  {
    AgentHistory a;
    a.id = next_agent++;
    a.kind = kind;
    a.footprint = fp;
    FutureTrack f;
    fill_track(path, s, t_h, a, f, scene.dt);
    scene.gt_futures[a.id] = std::move(f);
    scene.agents.push_back(std::move(a));
  }

  void set_ego(const Path & path, const std::vector<double> & s)
  {
    scene.ego.id = 1;
    scene.ego.kind = AgentKind::kCar;
    FutureTrack f;
    fill_track(path, s, t_h, scene.ego, f, scene.dt);
    scene.gt_futures[scene.ego.id] = std::move(f);
  }

  void add_lane(const Path & path, double a, double b)
  {
    for (auto & pl : segments(path, a, b, PolylineKind::kLaneCenter, next_polyline)) scene.map.push_back(std::move(pl));
  }

  void add_route(const Path & path, double a, double b, bool primary)
  {
    auto & dst = primary ? scene.routes.primary : scene.routes.secondary;
    for (auto & pl : segments(path, a, b, PolylineKind::kRoute, next_polyline)) dst.push_back(std::move(pl));
  }
};

double uniform(std::mt19937_64 & rng, double lo, double hi)
{
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void straight(Builder & b, std::mt19937_64 & rng)
{
  const double v = uniform(rng, 6.0, 12.0);
  const double reach = v * b.t_f * b.scene.dt + 40.0;
  const Path lane0 = straight_path({-60.0, 0.0}, 0.0, 60.0 + reach + 20.0);
  const Path lane1 = straight_path({-60.0, kLaneWidth}, 0.0, 60.0 + reach + 20.0);
  b.set_ego(lane0, constant_speed(60.0, v, b.t_h, b.t_f, b.scene.dt));
  b.add_agent(AgentKind::kCar, lane0, constant_speed(60.0 + uniform(rng, 20.0, 35.0), v + uniform(rng, 0.0, 2.0), b.t_h, b.t_f, b.scene.dt));
  b.add_agent(AgentKind::kCar, lane1, constant_speed(60.0 + uniform(rng, -15.0, 15.0), uniform(rng, 5.0, 12.0), b.t_h, b.t_f, b.scene.dt));
  b.add_lane(lane0, 20.0, lane0.length());
  b.add_lane(lane1, 20.0, lane1.length());
  b.add_route(lane0, 60.0, lane0.length(), true);
}

void stop_behind_lead(Builder & b, std::mt19937_64 & rng, const IdmParams & idm)
{
  const double dt = b.scene.dt;
  const double v_lead = uniform(rng, 3.0, 5.0);
  const double decel = uniform(rng, 2.0, 3.0);
  const double v_ego = uniform(rng, 5.0, 7.0);
  const double lead_start = 60.0 + uniform(rng, 20.0, 26.0);
  const Path lane = straight_path({-60.0, 0.0}, 0.0, 260.0);

  std::vector<double> lead, ego;
  for (int i = -b.t_h; i <= 0; ++i) {
    lead.push_back(lead_start + v_lead * i * dt);
    ego.push_back(60.0 + v_ego * i * dt);
  }
  const double length = b.scene.ego.footprint.length;
  IdmParams p = idm;
  p.desired_speed = 10.0;
  double vl = v_lead, ve = v_ego;
  for (int i = 1; i <= b.t_f; ++i) {
    const double a_lead = vl > 0.0 ? -decel : 0.0;
    const double gap = lead.back() - ego.back() - length;
    double a = idm_accel(ve, gap, ve - vl, p);
    lead.push_back(lead.back() + std::max(0.0, vl * dt + 0.5 * a_lead * dt * dt));
    vl = std::max(0.0, vl + a_lead * dt);
    if (ve + a * dt <= 0.0) a = -ve / dt;
    ego.push_back(ego.back() + std::max(0.0, ve * dt + 0.5 * a * dt * dt));
    ve = std::max(0.0, ve + a * dt);
    if (ve < 0.05 && a < 0.0) ve = 0.0;
  }
  b.set_ego(lane, ego);
  b.add_agent(AgentKind::kCar, lane, lead);
  const Path other = straight_path({-60.0, kLaneWidth}, 0.0, 260.0);
  b.add_agent(AgentKind::kCar, other, constant_speed(60.0 + uniform(rng, -10.0, 10.0), uniform(rng, 6.0, 9.0), b.t_h, b.t_f, dt));
  b.add_lane(lane, 20.0, 180.0);
  b.add_lane(other, 20.0, 180.0);
  b.add_route(lane, 60.0, 200.0, true);
}

void lane_change(Builder & b, std::mt19937_64 & rng)
{
  const double dt = b.scene.dt;
  const double v = uniform(rng, 7.0, 11.0);
  const double duration = uniform(rng, 3.0, 4.5);
  const double side = std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? 1.0 : -1.0;
  const double reach = v * b.t_f * dt + 40.0;
  // Lane-change path: lateral smoothstep over `duration` seconds of travel.
  std::vector<Vec2> pts;
  for (double x = -60.0; x <= 60.0 + reach + 20.0; x += 0.25) {
    const double u = std::clamp((x - 60.0) / (v * duration), 0.0, 1.0);
    pts.emplace_back(x, side * kLaneWidth * u * u * (3.0 - 2.0 * u));
  }
  const Path ego_path(pts);
  const double ego_s0 = 120.0;  // arc length of x = 60 (straight before the change)
  b.set_ego(ego_path, constant_speed(ego_s0, v, b.t_h, b.t_f, dt));
  const Path current = straight_path({-60.0, 0.0}, 0.0, 120.0 + reach + 20.0);
  const Path target = straight_path({-60.0, side * kLaneWidth}, 0.0, 120.0 + reach + 20.0);
  b.add_agent(AgentKind::kCar, current, constant_speed(60.0 + uniform(rng, 25.0, 40.0), v - uniform(rng, 1.0, 3.0), b.t_h, b.t_f, dt));
  b.add_agent(AgentKind::kCar, target, constant_speed(60.0 - uniform(rng, 15.0, 25.0), v, b.t_h, b.t_f, dt));
  b.add_lane(current, 20.0, current.length());
  b.add_lane(target, 20.0, target.length());
  b.add_route(target, 60.0, target.length(), true);
  b.add_route(current, 60.0, current.length(), false);
}

void unprotected_left(Builder & b, std::mt19937_64 & rng)
{
  const double dt = b.scene.dt;
  const double v = uniform(rng, 4.0, 6.0);
  const double radius = uniform(rng, 9.0, 12.0);
  const double approach = uniform(rng, 8.0, 14.0);
  // Ego comes in along +x on y = 0, turns left around (0, radius), leaves along +y.
  std::vector<Vec2> pts;
  for (double x = -approach - 60.0; x < 0.0; x += 0.5) pts.emplace_back(x, 0.0);
  for (int k = 0; k <= 60; ++k) {
    const double a = -0.5 * M_PI + 0.5 * M_PI * k / 60.0;
    pts.emplace_back(radius * std::cos(a), radius + radius * std::sin(a));
  }
  for (double y = radius + 0.5; y <= radius + 150.0; y += 0.5) pts.emplace_back(radius, y);
  const Path ego_path(pts);
  const double s0 = 60.0;  // ego sits `approach` metres before the turn
  b.set_ego(ego_path, constant_speed(s0, v, b.t_h, b.t_f, dt));

  const double v_on = uniform(rng, 7.0, 10.0);
  const Path oncoming = straight_path({radius + 120.0, kLaneWidth}, M_PI, 300.0);
  b.add_agent(AgentKind::kCar, oncoming, constant_speed(uniform(rng, 40.0, 70.0), v_on, b.t_h, b.t_f, dt));
  const Path crossing = straight_path({radius - kLaneWidth, radius + 80.0}, -0.5 * M_PI, 200.0);
  b.add_agent(AgentKind::kCyclist, crossing, constant_speed(uniform(rng, 10.0, 30.0), uniform(rng, 3.0, 5.0), b.t_h, b.t_f, dt), {1.8, 0.8});

  const Path main_road = straight_path({-approach - 60.0, 0.0}, 0.0, approach + 60.0 + 120.0);
  b.add_lane(main_road, 0.0, main_road.length());
  b.add_lane(oncoming, 0.0, 200.0);
  b.add_lane(ego_path, s0, ego_path.length());
  b.add_route(ego_path, s0, ego_path.length(), true);
}

}  // namespace

std::string_view to_string(SyntheticKind kind)
{
  switch (kind) {
    case SyntheticKind::kStraight: return "straight";
    case SyntheticKind::kStopBehindLead: return "stop-behind-lead";
    case SyntheticKind::kLaneChange: return "lane-change";
    case SyntheticKind::kUnprotectedLeft: return "unprotected-left";
  }
  return "?";
}

SyntheticKind parse_synthetic_kind(std::string_view name)
{
  for (auto k : {SyntheticKind::kStraight, SyntheticKind::kStopBehindLead, SyntheticKind::kLaneChange,
                 SyntheticKind::kUnprotectedLeft}) {
    if (name == to_string(k)) return k;
  }
  throw Error("cli_io", "unknown synthetic kind '" + std::string(name) + "'");
}

Scenario gen_synthetic(SyntheticKind kind, std::uint64_t seed, const SyntheticOptions & options)
{
  if (options.history_steps < 0 || options.future_steps < 1) throw Error("cli_io", "invalid synthetic horizon");
  std::mt19937_64 rng(seed);
  Builder b;
  b.t_h = options.history_steps;
  b.t_f = options.future_steps;
  b.scene.id = std::string(to_string(kind)) + "-" + std::to_string(seed);
  b.scene.frame = Frame::kGlobal;
  switch (kind) {
    case SyntheticKind::kStraight: straight(b, rng); break;
    case SyntheticKind::kStopBehindLead: stop_behind_lead(b, rng, options.idm); break;
    case SyntheticKind::kLaneChange: lane_change(b, rng); break;
    case SyntheticKind::kUnprotectedLeft: unprotected_left(b, rng); break;
  }

  // Re-anchor so the ego starts at the origin, then optionally move the
  // whole scene to a random global pose.
  const auto & e = b.scene.ego.current();
  RigidTransform anchor{e.position(), e.heading};
  Scenario out = transform_scenario(b.scene, anchor);
  if (options.random_pose) {
    const RigidTransform pose{Vec2(uniform(rng, -500.0, 500.0), uniform(rng, -500.0, 500.0)), uniform(rng, -M_PI, M_PI)};
    out = transform_scenario(out, pose.inverse());
  }
  out.frame = Frame::kGlobal;
  validate_scenario(out);
  return out;
}

}  // namespace int2plan
