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

#include "int2plan/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "json.hpp"

#include "int2plan/error.hpp"
#include "int2plan/geometry.hpp"
#include "int2plan/logging.hpp"

namespace int2plan {

std::string_view to_string(SimulationMode mode)
{
  switch (mode) {
    case SimulationMode::kOpenLoop: return "OPEN_LOOP";
    case SimulationMode::kNonReactive: return "NONREACTIVE_CL";
    case SimulationMode::kReactive: return "REACTIVE_CL";
  }
  return "?";
}

SimulationMode parse_simulation_mode(std::string_view name)
{
  if (name == "open" || name == "OPEN_LOOP") return SimulationMode::kOpenLoop;
  if (name == "nonreactive" || name == "NONREACTIVE_CL") return SimulationMode::kNonReactive;
  if (name == "reactive" || name == "REACTIVE_CL") return SimulationMode::kReactive;
  throw Error("simulator", "unknown simulation mode '" + std::string(name) + "'");
}

void IdmParams::validate() const
{
  if (!(desired_speed > 0 && min_gap > 0 && time_headway > 0 && max_accel > 0 && comfort_decel > 0)) {
    throw Error("simulator", "IDM parameters must be strictly positive");
  }
  if (!(exponent >= 1.0)) throw Error("simulator", "IDM exponent must be at least 1");
}

double idm_accel(double v, double gap, double closing_speed, const IdmParams & p)
{
  const double hard = 2.0 * p.comfort_decel;
  if (gap <= 0.0) return -hard;
  double a = 1.0 - std::pow(v / p.desired_speed, p.exponent);
  if (std::isfinite(gap)) {
    const double desired =
      std::max(0.0, p.min_gap + v * p.time_headway + v * closing_speed / (2.0 * std::sqrt(p.max_accel * p.comfort_decel)));
    a -= (desired / gap) * (desired / gap);
  }
  return std::clamp(p.max_accel * a, -hard, p.max_accel);
}

EgoDynamicState step_bicycle(const EgoDynamicState & s, double accel, double steer, double dt)
{
  EgoDynamicState out = s;
  out.x += s.v * std::cos(s.heading) * dt;
  out.y += s.v * std::sin(s.heading) * dt;
  out.heading = wrap_angle(s.heading + s.v / s.wheelbase * std::tan(steer) * dt);
  out.v = std::max(0.0, s.v + accel * dt);
  return out;
}

ControlCommand track_trajectory(
  const EgoDynamicState & state, std::span<const Vec2> plan, double dt, const TrackerParams & params)
{
  ControlCommand cmd;
  const Vec2 pos(state.x, state.y);
  const Vec2 fwd(std::cos(state.heading), std::sin(state.heading));
  if (plan.empty()) {
    cmd.accel = std::clamp(-state.v / dt, -params.max_decel, params.max_accel);
    return cmd;
  }

  // Longitudinal: plan speed, its change, and where the plan expects us now.
  const double v_target = plan.size() >= 2 ? (plan[1] - plan[0]).norm() / dt : (plan[0] - pos).norm() / dt;
  const double a_ff = plan.size() >= 3 ? ((plan[2] - plan[1]).norm() - (plan[1] - plan[0]).norm()) / (dt * dt) : 0.0;
  const Vec2 expected_now = plan.size() >= 2 ? Vec2(2.0 * plan[0] - plan[1]) : pos;
  const double along_error = (expected_now - pos).dot(fwd);
  cmd.accel = std::clamp(
    a_ff + params.speed_gain * (v_target - state.v) + params.position_gain * along_error, -params.max_decel,
    params.max_accel);

  // Lateral: pure pursuit on the polyline [pos projection ... plan end].
  const double lookahead = std::max(params.min_lookahead, params.lookahead_gain * state.v);
  Vec2 target = plan.back();
  std::vector<double> cum(plan.size(), 0.0);
  for (std::size_t i = 1; i < plan.size(); ++i) cum[i] = cum[i - 1] + (plan[i] - plan[i - 1]).norm();
  if (cum.back() > 1e-6) {
    const auto proj = project_onto_polyline(plan, pos);
    const double goal = proj.arc_length + lookahead;
    if (goal <= cum.back()) {
      auto it = std::lower_bound(cum.begin(), cum.end(), goal);
      const auto j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cum.begin(), 1));
      const double len = cum[j] - cum[j - 1];
      target = plan[j - 1] + ((goal - cum[j - 1]) / len) * (plan[j] - plan[j - 1]);
    } else {
      // Extend past the end along the last moving segment.
      std::size_t j = plan.size() - 1;
      while (j > 0 && cum[j] - cum[j - 1] <= 1e-9) --j;
      const Vec2 dir = (plan[j] - plan[j - 1]).normalized();
      target = plan.back() + (goal - cum.back()) * dir;
    }
  }
  const Vec2 rel = target - pos;
  const double dist = rel.norm();
  if (dist < 1e-6) return cmd;
  const double alpha = wrap_angle(std::atan2(rel.y(), rel.x()) - state.heading);
  if (std::abs(alpha) > 0.5 * M_PI) {
    cmd.steer = std::copysign(params.max_steer, alpha);
    cmd.steer_saturated = true;
    logger()->debug("track_trajectory: target behind the vehicle, steering saturated");
    return cmd;
  }
  const double steer = std::atan(2.0 * state.wheelbase * std::sin(alpha) / dist);
  cmd.steer = std::clamp(steer, -params.max_steer, params.max_steer);
  cmd.steer_saturated = std::abs(steer) > params.max_steer;
  return cmd;
}

namespace {

/// Logged state per step (step 0 = t0) with finite-difference kinematics.
std::vector<AgentState> logged_states(const AgentHistory & agent, const FutureTrack & future, int steps, double dt)
{
  std::vector<AgentState> out{agent.current()};
  for (int i = 1; i <= steps; ++i) {
    AgentState s;
    s.t = agent.current().t + i;
    const auto & prev = out.back();
    if (i - 1 < static_cast<int>(future.size()) && future[i - 1].valid) {
      s.valid = true;
      s.x = future[i - 1].x;
      s.y = future[i - 1].y;
      s.heading = prev.heading;
      if (prev.valid) {
        const Vec2 d = s.position() - prev.position();
        s.vx = d.x() / dt;
        s.vy = d.y() / dt;
        if (d.norm() > 1e-3) s.heading = std::atan2(d.y(), d.x());
      }
    }
    out.push_back(s);
  }
  return out;
}

AgentSnapshot snapshot(const AgentState & s)
{
  if (!s.valid) return {};
  return {s.x, s.y, s.heading, s.speed(), true};
}

/// IDM-driven agent confined to its logged path.
struct ReactiveAgent
{
  std::vector<Vec2> path;
  std::vector<double> arc;
  double s = 0.0;
  double v = 0.0;
  IdmParams idm;

  Vec2 position() const { return at(s).first; }
  double heading() const { return at(s).second; }

  std::pair<Vec2, double> at(double q) const
  {
    auto it = std::upper_bound(arc.begin(), arc.end(), q);
    std::size_t j = it == arc.begin() ? 0 : static_cast<std::size_t>(it - arc.begin()) - 1;
    j = std::min(j, path.size() - 2);
    const Vec2 d = path[j + 1] - path[j];
    const double len = arc[j + 1] - arc[j];
    return {path[j] + ((q - arc[j]) / len) * d, std::atan2(d.y(), d.x())};
  }
};

std::optional<ReactiveAgent> make_reactive(
  const AgentHistory & agent, const FutureTrack & future, const IdmParams & base, double dt)
{
  if (!agent.current().valid) return std::nullopt;
  std::vector<Vec2> pts;
  auto push = [&](const Vec2 & p) {
    if (pts.empty() || (pts.back() - p).norm() > 1e-6) pts.push_back(p);
  };
  double top_speed = 0.0;
  std::optional<Vec2> prev;
  for (const auto & s : agent.states) {
    if (!s.valid) continue;
    push(s.position());
    top_speed = std::max(top_speed, s.speed());
  }
  const std::size_t current_index = pts.size() - 1;
  prev = agent.current().position();
  for (const auto & f : future) {
    if (!f.valid) continue;
    top_speed = std::max(top_speed, (f.position() - *prev).norm() / dt);
    prev = f.position();
    push(f.position());
  }
  if (pts.size() < 2) return std::nullopt;
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) total += (pts[i] - pts[i - 1]).norm();
  if (total < 0.5) return std::nullopt;
  const Vec2 tail = (pts.back() - pts[pts.size() - 2]).normalized();
  pts.push_back(pts.back() + 100.0 * tail);

  ReactiveAgent r;
  r.path = std::move(pts);
  r.arc.assign(r.path.size(), 0.0);
  for (std::size_t i = 1; i < r.path.size(); ++i) r.arc[i] = r.arc[i - 1] + (r.path[i] - r.path[i - 1]).norm();
  r.s = r.arc[current_index];
  r.v = agent.current().speed();
  r.idm = base;
  r.idm.desired_speed = std::max(top_speed, 1.0);
  return r;
}

struct Obstacle
{
  Vec2 position;
  double heading = 0.0;
  double speed = 0.0;
  double length = 0.0;
};

/// Gap and closing speed to the nearest obstacle ahead on the follower's path.
std::pair<double, double> find_leader(
  const ReactiveAgent & f, double own_length, const std::vector<Obstacle> & others)
{
  constexpr double kLateralBand = 2.0;
  double gap = std::numeric_limits<double>::infinity();
  double closing = 0.0;
  for (const auto & o : others) {
    const auto proj = project_onto_polyline(f.path, o.position);
    if (proj.distance > kLateralBand || proj.arc_length <= f.s + 1e-6) continue;
    const double g = proj.arc_length - f.s - 0.5 * (own_length + o.length);
    if (g < gap) {
      gap = g;
      const Vec2 d = f.path[proj.segment + 1] - f.path[proj.segment];
      const double along = o.speed * std::cos(o.heading - std::atan2(d.y(), d.x()));
      closing = f.v - along;
    }
  }
  return {gap, closing};
}

EgoRecord record_of(const EgoDynamicState & s, double t)
{
  return {t, s.x, s.y, s.heading, s.v};
}

Scenario build_observation(
  const Scenario & scenario, const std::vector<AgentState> & ego_timeline,
  const std::vector<std::vector<AgentState>> & agent_timelines,
  const std::vector<std::vector<AgentState>> & ego_and_agent_logs, int step)
{
  const int window = static_cast<int>(scenario.ego.states.size());
  const int t_f = scenario.future_steps();
  Scenario obs;
  obs.id = scenario.id;
  obs.dt = scenario.dt;
  obs.speed_limit = scenario.speed_limit;
  obs.frame = Frame::kGlobal;
  obs.map = scenario.map;
  obs.routes = scenario.routes;
  auto tail = [&](const std::vector<AgentState> & timeline) {
    return std::vector<AgentState>(timeline.end() - window, timeline.end());
  };
  auto future = [&](const std::vector<AgentState> & log) {
    FutureTrack out(t_f);
    for (int i = 0; i < t_f; ++i) {
      const int idx = step + 1 + i;
      if (idx < static_cast<int>(log.size()) && log[idx].valid) out[i] = {log[idx].x, log[idx].y, true};
    }
    return out;
  };
  obs.ego = scenario.ego;
  obs.ego.states = tail(ego_timeline);
  obs.gt_futures[obs.ego.id] = future(ego_and_agent_logs[0]);
  for (std::size_t a = 0; a < scenario.agents.size(); ++a) {
    AgentHistory h = scenario.agents[a];
    h.states = tail(agent_timelines[a]);
    obs.gt_futures[h.id] = future(ego_and_agent_logs[a + 1]);
    obs.agents.push_back(std::move(h));
  }
  return normalize_to_ego_frame(obs);
}

AgentState as_state(const Vec2 & p, double heading, double v, int t)
{
  AgentState s;
  s.t = t;
  s.x = p.x();
  s.y = p.y();
  s.heading = wrap_angle(heading);
  s.vx = v * std::cos(heading);
  s.vy = v * std::sin(heading);
  s.valid = true;
  return s;
}

std::vector<AgentPrediction> constant_velocity_predictions(const Scenario & obs, std::size_t steps)
{
  std::vector<AgentPrediction> out;
  for (const auto & a : obs.agents) {
    const auto & s = a.current();
    if (!s.valid) continue;
    AgentPrediction p;
    p.id = a.id;
    p.footprint = a.footprint;
    p.initial_heading = s.heading;
    for (std::size_t i = 1; i <= steps; ++i) p.points.push_back(s.position() + s.velocity() * (obs.dt * i));
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

Rollout log_rollout(const Scenario & scenario, int steps)
{
  if (scenario.frame != Frame::kGlobal && scenario.frame != Frame::kEgo) throw Error("simulator", "bad frame");
  steps = std::min(steps, scenario.future_steps());
  Rollout r;
  r.scenario_id = scenario.id;
  r.dt = scenario.dt;
  r.ego_footprint = scenario.ego.footprint;
  const auto ego = logged_states(scenario.ego, scenario.future_of(scenario.ego.id), steps, scenario.dt);
  for (int i = 0; i <= steps; ++i) {
    r.ego.push_back({i * scenario.dt, ego[i].x, ego[i].y, ego[i].heading, ego[i].speed()});
  }
  for (const auto & a : scenario.agents) {
    AgentTrack track{a.id, a.footprint, {}};
    for (const auto & s : logged_states(a, scenario.future_of(a.id), steps, scenario.dt)) {
      track.states.push_back(snapshot(s));
    }
    r.agents.push_back(std::move(track));
  }
  return r;
}

Rollout rollout_closed_loop(const Scenario & scenario, const Planner & planner, const SimulationConfig & config)
{
  if (scenario.frame != Frame::kGlobal) throw Error("simulator", "rollouts run on GLOBAL-frame scenarios");
  if (!(config.horizon_s > 0.0) || !(config.replan_period_s > 0.0)) {
    throw Error("simulator", "horizon and replan period must be positive");
  }
  config.idm.validate();
  const double dt = scenario.dt;
  const int t_f = scenario.future_steps();
  const int steps = std::min(static_cast<int>(std::lround(config.horizon_s / dt)), t_f);
  const int replan_every = std::max(1, static_cast<int>(std::lround(config.replan_period_s / dt)));

  std::vector<std::vector<AgentState>> logs;
  logs.push_back(logged_states(scenario.ego, scenario.future_of(scenario.ego.id), t_f, dt));
  for (const auto & a : scenario.agents) logs.push_back(logged_states(a, scenario.future_of(a.id), t_f, dt));

  Rollout r;
  r.scenario_id = scenario.id;
  r.mode = config.mode;
  r.dt = dt;
  r.ego_footprint = scenario.ego.footprint;
  for (const auto & a : scenario.agents) r.agents.push_back({a.id, a.footprint, {}});

  const auto & e0 = scenario.ego.current();
  EgoDynamicState ego{e0.x, e0.y, wrap_angle(e0.heading), e0.speed(), config.wheelbase};
  r.ego.push_back(record_of(ego, 0.0));
  for (std::size_t a = 0; a < scenario.agents.size(); ++a) r.agents[a].states.push_back(snapshot(logs[a + 1][0]));

  std::vector<AgentState> ego_timeline = scenario.ego.states;
  std::vector<std::vector<AgentState>> agent_timelines;
  for (const auto & a : scenario.agents) agent_timelines.push_back(a.states);

  auto plan_once = [&](int step, const EgoDynamicState & pose) -> std::optional<ReplanRecord> {
    const Scenario obs = build_observation(scenario, ego_timeline, agent_timelines, logs, step);
    PlannerOutput out;
    try {
      out = planner(obs);
    } catch (const std::exception & e) {
      r.aborted = true;
      r.abort_reason = std::string("planner failed at step ") + std::to_string(step) + ": " + e.what();
      logger()->warn("simulator: {}", r.abort_reason);
      return std::nullopt;
    }
    const int needed = config.mode == SimulationMode::kOpenLoop ? 1 : std::min(replan_every, steps - step);
    if (static_cast<int>(out.trajectory.size()) < needed) {
      r.aborted = true;
      r.abort_reason = "plan shorter than the replan period at step " + std::to_string(step);
      return std::nullopt;
    }
    std::vector<Vec2> local = out.trajectory;
    ReplanRecord rec;
    rec.t = step * dt;
    rec.step = step;
    rec.confidence = out.confidence;
    if (config.postprocess) {
      auto preds = out.predictions.empty() ? constant_velocity_predictions(obs, local.size()) : out.predictions;
      auto refined = refine_trajectory(
        local, build_reference_line(obs.routes), preds, obs.ego.footprint, config.refine);
      rec.postprocessed = true;
      rec.feasible = refined.feasible;
      local = refined.plan;
    }
    const RigidTransform to_global = RigidTransform{Vec2(pose.x, pose.y), pose.heading}.inverse();
    for (const auto & p : out.trajectory) rec.raw_plan.push_back(to_global.apply(p));
    for (const auto & p : local) rec.plan.push_back(to_global.apply(p));
    return rec;
  };

  if (config.mode == SimulationMode::kOpenLoop) {
    auto rec = plan_once(0, ego);
    if (!rec) return r;
    const int n = std::min<int>(steps, static_cast<int>(rec->plan.size()));
    std::vector<Vec2> path{Vec2(ego.x, ego.y)};
    path.insert(path.end(), rec->plan.begin(), rec->plan.begin() + n);
    const auto headings = headings_from_points(path, ego.heading);
    for (int i = 1; i <= n; ++i) {
      const double v = (path[i] - path[i - 1]).norm() / dt;
      r.ego.push_back({i * dt, path[i].x(), path[i].y(), wrap_angle(headings[i]), v});
      for (std::size_t a = 0; a < scenario.agents.size(); ++a) r.agents[a].states.push_back(snapshot(logs[a + 1][i]));
    }
    r.replans.push_back(std::move(*rec));
    return r;
  }

  std::vector<std::optional<ReactiveAgent>> reactive(scenario.agents.size());
  if (config.mode == SimulationMode::kReactive) {
    for (std::size_t a = 0; a < scenario.agents.size(); ++a) {
      reactive[a] = make_reactive(scenario.agents[a], scenario.future_of(scenario.agents[a].id), config.idm, dt);
    }
  }

  std::vector<Vec2> plan;
  int plan_origin = 0;
  for (int i = 0; i < steps; ++i) {
    if (i % replan_every == 0) {
      auto rec = plan_once(i, ego);
      if (!rec) return r;
      plan = rec->plan;
      plan_origin = i;
      r.replans.push_back(std::move(*rec));
    }
    const auto offset = static_cast<std::size_t>(std::min<int>(i - plan_origin, static_cast<int>(plan.size())));
    const auto cmd = track_trajectory(ego, std::span<const Vec2>(plan).subspan(offset), dt, config.tracker);

    std::vector<AgentState> next(scenario.agents.size());
    if (config.mode == SimulationMode::kReactive) {
      std::vector<Obstacle> obstacles(scenario.agents.size() + 1);
      obstacles[0] = {Vec2(ego.x, ego.y), ego.heading, ego.v, scenario.ego.footprint.length};
      std::vector<bool> present(scenario.agents.size() + 1, true);
      for (std::size_t a = 0; a < scenario.agents.size(); ++a) {
        const auto & s = agent_timelines[a].back();
        present[a + 1] = s.valid;
        obstacles[a + 1] = {s.position(), s.heading, s.speed(), scenario.agents[a].footprint.length};
      }
      for (std::size_t a = 0; a < scenario.agents.size(); ++a) {
        if (!reactive[a]) {
          next[a] = logs[a + 1][i + 1];
          continue;
        }
        std::vector<Obstacle> others;
        for (std::size_t o = 0; o < obstacles.size(); ++o) {
          if (o != a + 1 && present[o]) others.push_back(obstacles[o]);
        }
        auto & agent = *reactive[a];
        const auto [gap, closing] = find_leader(agent, scenario.agents[a].footprint.length, others);
        const double acc = idm_accel(agent.v, gap, closing, agent.idm);
        agent.s += std::max(0.0, agent.v * dt + 0.5 * acc * dt * dt);
        agent.v = std::max(0.0, agent.v + acc * dt);
        next[a] = as_state(agent.position(), agent.heading(), agent.v, logs[a + 1][i + 1].t);
      }
    } else {
      for (std::size_t a = 0; a < scenario.agents.size(); ++a) next[a] = logs[a + 1][i + 1];
    }

    ego = step_bicycle(ego, cmd.accel, cmd.steer, dt);
    r.ego.push_back(record_of(ego, (i + 1) * dt));
    ego_timeline.push_back(as_state(Vec2(ego.x, ego.y), ego.heading, ego.v, ego_timeline.back().t + 1));
    for (std::size_t a = 0; a < scenario.agents.size(); ++a) {
      agent_timelines[a].push_back(next[a]);
      r.agents[a].states.push_back(snapshot(next[a]));
    }
  }
  return r;
}

std::string rollout_to_json(const Rollout & r)
{
  using nlohmann::json;
  json root;
  root["scenario_id"] = r.scenario_id;
  root["mode"] = to_string(r.mode);
  root["dt"] = r.dt;
  root["aborted"] = r.aborted;
  if (r.aborted) root["abort_reason"] = r.abort_reason;
  json ego = json::array();
  for (const auto & e : r.ego) ego.push_back({e.t, e.x, e.y, e.heading, e.v});
  root["ego"] = std::move(ego);
  json agents = json::array();
  for (const auto & a : r.agents) {
    json states = json::array();
    for (const auto & s : a.states) states.push_back({s.x, s.y, s.heading, s.v, s.valid ? 1 : 0});
    agents.push_back({{"id", a.id}, {"length", a.footprint.length}, {"width", a.footprint.width}, {"states", states}});
  }
  root["agents"] = std::move(agents);
  json replans = json::array();
  auto points = [](const std::vector<Vec2> & pts) {
    json out = json::array();
    for (const auto & p : pts) out.push_back({p.x(), p.y()});
    return out;
  };
  for (const auto & rp : r.replans) {
    replans.push_back(
      {{"t", rp.t},
       {"step", rp.step},
       {"confidence", rp.confidence},
       {"postprocessed", rp.postprocessed},
       {"feasible", rp.feasible},
       {"plan", points(rp.plan)},
       {"raw_plan", points(rp.raw_plan)}});
  }
  root["replans"] = std::move(replans);
  return root.dump(1) + "\n";
}

}  // namespace int2plan
