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

#include "int2plan/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "int2plan/error.hpp"
#include "json.hpp"

namespace int2plan {

using nlohmann::json;

namespace {

constexpr const char * kModule = "scene_model";
constexpr std::array<std::string_view, kNumAgentKinds> kAgentKindNames = {
  "CAR", "BUS", "TRUCK", "CYCLIST", "TRICYCLE", "PEDESTRIAN", "ROADBLOCK"};
constexpr std::array<std::string_view, kNumPolylineKinds> kPolylineKindNames = {
  "LANE_CENTER", "LANE_DIVIDER", "CROSSWALK", "ROUTE"};

[[noreturn]] void fail(const std::string & path, const std::string & message)
{
  throw Error(kModule, path + ": " + message);
}

const json & member(const json & object, const char * key, const std::string & path)
{
  if (!object.is_object()) fail(path, "expected an object");
  auto it = object.find(key);
  if (it == object.end()) fail(path, std::string("missing field '") + key + "'");
  return *it;
}

double number(const json & value, const std::string & path)
{
  if (!value.is_number()) fail(path, "expected a number");
  const double v = value.get<double>();
  if (!std::isfinite(v)) fail(path, "non-finite number");
  return v;
}

std::int64_t integer(const json & value, const std::string & path)
{
  if (value.is_number_integer()) return value.get<std::int64_t>();
  if (value.is_number_float()) {
    const double v = value.get<double>();
    if (std::floor(v) == v && std::isfinite(v)) return static_cast<std::int64_t>(v);
  }
  fail(path, "expected an integer");
}

bool flag(const json & value, const std::string & path)
{
  if (value.is_boolean()) return value.get<bool>();
  const auto v = integer(value, path);
  if (v != 0 && v != 1) fail(path, "expected 0/1 or a boolean");
  return v == 1;
}

const json & array(const json & value, const std::string & path)
{
  if (!value.is_array()) fail(path, "expected an array");
  return value;
}

std::string index_path(const std::string & path, std::size_t i)
{
  return path + "[" + std::to_string(i) + "]";
}

AgentHistory parse_agent(const json & j, const std::string & path, int history_len)
{
  AgentHistory agent;
  agent.id = integer(member(j, "id", path), path + ".id");
  const auto & kind = member(j, "kind", path);
  if (!kind.is_string()) fail(path + ".kind", "expected a string");
  try {
    agent.kind = parse_agent_kind(kind.get<std::string>());
  } catch (const Error & e) {
    fail(path + ".kind", e.what());
  }
  agent.footprint.length = number(member(j, "length", path), path + ".length");
  agent.footprint.width = number(member(j, "width", path), path + ".width");
  const auto & states = array(member(j, "states", path), path + ".states");
  if (static_cast<int>(states.size()) > history_len) {
    fail(path + ".states", "history longer than t0_index + 1");
  }
  const auto missing = history_len - static_cast<int>(states.size());
  for (int i = 0; i < missing; ++i) {
    AgentState pad;
    pad.t = i;
    agent.states.push_back(pad);
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto p = index_path(path + ".states", i);
    const auto & row = array(states[i], p);
    if (row.size() != 7) fail(p, "expected [t, x, y, heading, vx, vy, valid]");
    AgentState s;
    s.t = static_cast<int>(integer(row[0], p + "[0]"));
    s.x = number(row[1], p + "[1]");
    s.y = number(row[2], p + "[2]");
    s.heading = number(row[3], p + "[3]");
    s.vx = number(row[4], p + "[4]");
    s.vy = number(row[5], p + "[5]");
    s.valid = flag(row[6], p + "[6]");
    agent.states.push_back(s);
  }
  return agent;
}

Polyline parse_polyline(const json & j, const std::string & path)
{
  Polyline line;
  line.id = integer(member(j, "id", path), path + ".id");
  const auto & kind = member(j, "kind", path);
  if (!kind.is_string()) fail(path + ".kind", "expected a string");
  try {
    line.kind = parse_polyline_kind(kind.get<std::string>());
  } catch (const Error & e) {
    fail(path + ".kind", e.what());
  }
  const auto & points = array(member(j, "points", path), path + ".points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto p = index_path(path + ".points", i);
    const auto & row = array(points[i], p);
    if (row.size() != 2) fail(p, "expected [x, y]");
    line.points.emplace_back(number(row[0], p + "[0]"), number(row[1], p + "[1]"));
  }
  return line;
}

json agent_to_json(const AgentHistory & agent)
{
  json states = json::array();
  for (const auto & s : agent.states) {
    states.push_back({s.t, s.x, s.y, s.heading, s.vx, s.vy, s.valid ? 1 : 0});
  }
  return {
    {"id", agent.id},
    {"kind", std::string(to_string(agent.kind))},
    {"states", std::move(states)},
    {"length", agent.footprint.length},
    {"width", agent.footprint.width}};
}

json polyline_to_json(const Polyline & line)
{
  json points = json::array();
  for (const auto & p : line.points) points.push_back({p.x(), p.y()});
  return {{"id", line.id}, {"kind", std::string(to_string(line.kind))}, {"points", std::move(points)}};
}

void validate_agent(const AgentHistory & agent, const std::string & path, int history_len)
{
  if (static_cast<int>(agent.states.size()) != history_len) {
    fail(path + ".states", "expected exactly t_h + 1 states");
  }
  if (!(agent.footprint.length > 0.0) || !(agent.footprint.width > 0.0)) {
    fail(path, "footprint must be positive");
  }
  for (std::size_t i = 0; i < agent.states.size(); ++i) {
    const auto & s = agent.states[i];
    const auto p = index_path(path + ".states", i);
    if (s.valid) {
      if (!(s.heading > -M_PI && s.heading <= M_PI)) fail(p, "heading outside (-pi, pi]");
    } else if (s.x != 0.0 || s.y != 0.0 || s.heading != 0.0 || s.vx != 0.0 || s.vy != 0.0) {
      fail(p, "invalid state must have zero kinematic fields");
    }
  }
}

void validate_polyline(const Polyline & line, const std::string & path)
{
  if (line.points.size() < 2) fail(path + ".points", "polyline needs at least 2 points");
  for (std::size_t i = 1; i < line.points.size(); ++i) {
    if ((line.points[i] - line.points[i - 1]).norm() <= 1e-9) {
      fail(index_path(path + ".points", i), "consecutive points coincide");
    }
  }
}

Polyline transform_polyline(const Polyline & line, const RigidTransform & tf)
{
  Polyline out = line;
  for (auto & p : out.points) p = tf.apply(p);
  return out;
}

AgentHistory transform_agent(const AgentHistory & agent, const RigidTransform & tf)
{
  AgentHistory out = agent;
  for (auto & s : out.states) {
    if (!s.valid) continue;
    const Vec2 p = tf.apply(s.position());
    const Vec2 v = tf.rotate(s.velocity());
    s.x = p.x();
    s.y = p.y();
    s.vx = v.x();
    s.vy = v.y();
    s.heading = tf.apply_heading(s.heading);
  }
  return out;
}

// Fills the feature rows of one polyline slot.
void write_polyline(
  const Polyline & line, int slot, int max_points, RowMatrixXd & features, BoolArray & point_mask)
{
  const int n = std::min<int>(static_cast<int>(line.points.size()), max_points);
  for (int i = 0; i < n; ++i) {
    const int row = slot * max_points + i;
    const Vec2 & p = line.points[i];
    Vec2 dir;
    if (i + 1 < static_cast<int>(line.points.size())) {
      dir = line.points[i + 1] - p;
    } else {
      dir = p - line.points[i - 1];
    }
    dir.normalize();
    features(row, 0) = p.x();
    features(row, 1) = p.y();
    features(row, 2) = dir.x();
    features(row, 3) = dir.y();
    features(row, 4 + static_cast<int>(line.kind)) = 1.0;
    point_mask(row) = true;
  }
}

double polyline_distance_to_origin(const Polyline & line)
{
  double best = std::numeric_limits<double>::infinity();
  for (const auto & p : line.points) best = std::min(best, p.norm());
  return best;
}

// Indices of the `capacity` nearest elements, returned in source order.
std::vector<int> keep_nearest(
  const std::vector<double> & distance, const std::vector<std::int64_t> & ids, int capacity)
{
  std::vector<int> order(distance.size());
  std::iota(order.begin(), order.end(), 0);
  if (static_cast<int>(order.size()) <= capacity) return order;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (distance[a] != distance[b]) return distance[a] < distance[b];
    return ids[a] < ids[b];
  });
  order.resize(capacity);
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace

std::string_view to_string(AgentKind kind) { return kAgentKindNames[static_cast<int>(kind)]; }
std::string_view to_string(PolylineKind kind)
{
  return kPolylineKindNames[static_cast<int>(kind)];
}

AgentKind parse_agent_kind(std::string_view name)
{
  for (int i = 0; i < kNumAgentKinds; ++i) {
    if (kAgentKindNames[i] == name) return static_cast<AgentKind>(i);
  }
  throw Error(kModule, "unknown agent kind '" + std::string(name) + "'");
}

PolylineKind parse_polyline_kind(std::string_view name)
{
  for (int i = 0; i < kNumPolylineKinds; ++i) {
    if (kPolylineKindNames[i] == name) return static_cast<PolylineKind>(i);
  }
  throw Error(kModule, "unknown polyline kind '" + std::string(name) + "'");
}

double wrap_angle(double angle)
{
  if (angle > -M_PI && angle <= M_PI) return angle;
  double wrapped = std::remainder(angle, 2.0 * M_PI);
  if (wrapped <= -M_PI) wrapped += 2.0 * M_PI;
  return wrapped;
}

double Polyline::length() const
{
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) total += (points[i] - points[i - 1]).norm();
  return total;
}

int Scenario::future_steps() const
{
  auto it = gt_futures.find(ego.id);
  return it == gt_futures.end() ? 0 : static_cast<int>(it->second.size());
}

const FutureTrack & Scenario::future_of(std::int64_t agent_id) const
{
  auto it = gt_futures.find(agent_id);
  if (it == gt_futures.end()) {
    throw Error(kModule, "no ground-truth future for agent " + std::to_string(agent_id));
  }
  return it->second;
}

void validate_scenario(const Scenario & scenario)
{
  if (std::abs(scenario.dt - kStepSeconds) > 1e-9) {
    fail("meta.dt", "only 0.1 s steps are supported");
  }
  const int history_len = static_cast<int>(scenario.ego.states.size());
  if (history_len < 1) fail("ego.states", "empty history");
  validate_agent(scenario.ego, "ego", history_len);
  if (!scenario.ego.current().valid) fail("ego.states", "ego state at t0 must be valid");
  std::set<std::int64_t> ids{scenario.ego.id};
  for (std::size_t i = 0; i < scenario.agents.size(); ++i) {
    const auto p = index_path("agents", i);
    validate_agent(scenario.agents[i], p, history_len);
    if (!ids.insert(scenario.agents[i].id).second) fail(p + ".id", "duplicate agent id");
  }
  for (std::size_t i = 0; i < scenario.map.size(); ++i) {
    validate_polyline(scenario.map[i], index_path("map", i));
  }
  if (scenario.routes.primary.empty()) fail("routes.primary", "empty primary route");
  auto check_routes = [](const std::vector<Polyline> & lines, const std::string & path) {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto p = index_path(path, i);
      validate_polyline(lines[i], p);
      if (lines[i].kind != PolylineKind::kRoute) fail(p + ".kind", "route polylines must be ROUTE");
    }
  };
  check_routes(scenario.routes.primary, "routes.primary");
  check_routes(scenario.routes.secondary, "routes.secondary");
  const int future_len = scenario.future_steps();
  if (future_len < 1) fail("gt_futures", "missing ego future");
  for (std::int64_t id : ids) {
    auto it = scenario.gt_futures.find(id);
    if (it == scenario.gt_futures.end()) {
      fail("gt_futures", "missing future for agent " + std::to_string(id));
    }
    if (static_cast<int>(it->second.size()) != future_len) {
      fail("gt_futures." + std::to_string(id), "expected exactly t_f points");
    }
  }
  if (scenario.gt_futures.size() != ids.size()) {
    fail("gt_futures", "future for an unknown agent id");
  }
  if (scenario.frame == Frame::kEgo) {
    const auto & s = scenario.ego.current();
    if (s.x != 0.0 || s.y != 0.0 || s.heading != 0.0) {
      fail("ego.states", "EGO frame requires the ego at the origin with heading 0");
    }
  }
}

Scenario load_scenario(std::string_view content)
{
  json root;
  try {
    root = json::parse(content.begin(), content.end());
  } catch (const json::parse_error & e) {
    const std::size_t offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, content.size());
    const auto head = content.substr(0, offset);
    const auto line = 1 + std::count(head.begin(), head.end(), '\n');
    const auto last_nl = head.rfind('\n');
    const auto column = last_nl == std::string_view::npos ? offset + 1 : offset - last_nl;
    throw Error(
      kModule, "parse error at line " + std::to_string(line) + ", column " + std::to_string(column) +
                 ": " + e.what());
  }

  Scenario scenario;
  const auto & meta = member(root, "meta", "$");
  const auto & id = member(meta, "id", "meta");
  scenario.id = id.is_string() ? id.get<std::string>() : id.dump();
  scenario.dt = number(member(meta, "dt", "meta"), "meta.dt");
  if (std::abs(scenario.dt - kStepSeconds) > 1e-9) {
    fail("meta.dt", "only 0.1 s steps are supported");
  }
  const auto t0_index = integer(member(meta, "t0_index", "meta"), "meta.t0_index");
  if (t0_index < 0) fail("meta.t0_index", "must be non-negative");
  if (auto it = meta.find("speed_limit"); it != meta.end()) {
    scenario.speed_limit = number(*it, "meta.speed_limit");
  }
  if (auto it = meta.find("frame"); it != meta.end()) {
    const auto name = it->is_string() ? it->get<std::string>() : std::string();
    if (name == "GLOBAL") scenario.frame = Frame::kGlobal;
    else if (name == "EGO") scenario.frame = Frame::kEgo;
    else fail("meta.frame", "expected GLOBAL or EGO");
  }
  const int history_len = static_cast<int>(t0_index) + 1;

  scenario.ego = parse_agent(member(root, "ego", "$"), "ego", history_len);
  const auto & agents = array(member(root, "agents", "$"), "agents");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    scenario.agents.push_back(parse_agent(agents[i], index_path("agents", i), history_len));
  }
  const auto & map = array(member(root, "map", "$"), "map");
  for (std::size_t i = 0; i < map.size(); ++i) {
    scenario.map.push_back(parse_polyline(map[i], index_path("map", i)));
  }
  const auto & routes = member(root, "routes", "$");
  const auto & primary = array(member(routes, "primary", "routes"), "routes.primary");
  for (std::size_t i = 0; i < primary.size(); ++i) {
    scenario.routes.primary.push_back(parse_polyline(primary[i], index_path("routes.primary", i)));
  }
  if (auto it = routes.find("secondary"); it != routes.end()) {
    const auto & secondary = array(*it, "routes.secondary");
    for (std::size_t i = 0; i < secondary.size(); ++i) {
      scenario.routes.secondary.push_back(
        parse_polyline(secondary[i], index_path("routes.secondary", i)));
    }
  }
  const auto & futures = member(root, "gt_futures", "$");
  if (!futures.is_object()) fail("gt_futures", "expected an object keyed by agent id");
  for (auto it = futures.begin(); it != futures.end(); ++it) {
    const auto path = "gt_futures." + it.key();
    std::int64_t agent_id = 0;
    try {
      std::size_t used = 0;
      agent_id = std::stoll(it.key(), &used);
      if (used != it.key().size()) throw std::invalid_argument("trailing");
    } catch (const std::exception &) {
      fail(path, "key is not an integer agent id");
    }
    FutureTrack track;
    const auto & points = array(it.value(), path);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto p = index_path(path, i);
      const auto & row = array(points[i], p);
      if (row.size() != 3) fail(p, "expected [x, y, valid]");
      track.push_back({number(row[0], p + "[0]"), number(row[1], p + "[1]"), flag(row[2], p + "[2]")});
    }
    scenario.gt_futures[agent_id] = std::move(track);
  }

  validate_scenario(scenario);
  return scenario;
}

Scenario load_scenario_file(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(kModule, "cannot open scenario file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_scenario(buffer.str());
}

std::string save_scenario(const Scenario & scenario)
{
  json root;
  root["meta"] = {
    {"id", scenario.id},
    {"dt", scenario.dt},
    {"t0_index", scenario.history_steps()},
    {"speed_limit", scenario.speed_limit},
    {"frame", scenario.frame == Frame::kGlobal ? "GLOBAL" : "EGO"}};
  root["ego"] = agent_to_json(scenario.ego);
  root["agents"] = json::array();
  for (const auto & agent : scenario.agents) root["agents"].push_back(agent_to_json(agent));
  root["map"] = json::array();
  for (const auto & line : scenario.map) root["map"].push_back(polyline_to_json(line));
  root["routes"] = {{"primary", json::array()}, {"secondary", json::array()}};
  for (const auto & line : scenario.routes.primary) {
    root["routes"]["primary"].push_back(polyline_to_json(line));
  }
  for (const auto & line : scenario.routes.secondary) {
    root["routes"]["secondary"].push_back(polyline_to_json(line));
  }
  root["gt_futures"] = json::object();
  for (const auto & [id, track] : scenario.gt_futures) {
    json points = json::array();
    for (const auto & p : track) points.push_back({p.x, p.y, p.valid ? 1 : 0});
    root["gt_futures"][std::to_string(id)] = std::move(points);
  }
  return root.dump() + "\n";
}

void save_scenario_file(const Scenario & scenario, const std::string & path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(kModule, "cannot write scenario file '" + path + "'");
  out << save_scenario(scenario);
}

Vec2 RigidTransform::rotate(const Vec2 & v) const
{
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  return {c * v.x() + s * v.y(), -s * v.x() + c * v.y()};
}

Vec2 RigidTransform::apply(const Vec2 & p) const { return rotate(p - origin); }

RigidTransform RigidTransform::inverse() const
{
  // apply(p) = R(-h)(p - o), so the inverse maps q to R(h) q + o.
  RigidTransform inv;
  inv.heading = wrap_angle(-heading);
  inv.origin = -RigidTransform{Vec2::Zero(), heading}.rotate(origin);
  return inv;
}

Scenario transform_scenario(const Scenario & scenario, const RigidTransform & tf)
{
  Scenario out = scenario;
  out.ego = transform_agent(scenario.ego, tf);
  for (auto & agent : out.agents) agent = transform_agent(agent, tf);
  for (auto & line : out.map) line = transform_polyline(line, tf);
  for (auto & line : out.routes.primary) line = transform_polyline(line, tf);
  for (auto & line : out.routes.secondary) line = transform_polyline(line, tf);
  for (auto & [id, track] : out.gt_futures) {
    for (auto & p : track) {
      if (!p.valid) continue;
      const Vec2 q = tf.apply(p.position());
      p.x = q.x();
      p.y = q.y();
    }
  }
  return out;
}

Scenario normalize_to_ego_frame(const Scenario & scenario)
{
  if (scenario.frame != Frame::kGlobal) throw Error(kModule, "scenario is already in the EGO frame");
  const auto & ego = scenario.ego.current();
  if (!ego.valid) throw Error(kModule, "ego state at t0 is invalid");
  Scenario out = transform_scenario(scenario, RigidTransform{ego.position(), ego.heading});
  // Pin the ego exactly; the rigid transform leaves rounding residue otherwise.
  auto & current = out.ego.states.back();
  current.x = 0.0;
  current.y = 0.0;
  current.heading = 0.0;
  out.frame = Frame::kEgo;
  return out;
}

Scenario crop_map(const Scenario & scenario, double range_m)
{
  if (scenario.frame != Frame::kEgo) throw Error(kModule, "crop_map requires the EGO frame");
  Scenario out = scenario;
  out.map.clear();
  for (const auto & line : scenario.map) {
    const bool inside = std::any_of(line.points.begin(), line.points.end(), [&](const Vec2 & p) {
      return std::max(std::abs(p.x()), std::abs(p.y())) <= range_m;
    });
    if (inside) out.map.push_back(line);
  }
  return out;
}

SceneTensors tensorize(const Scenario & scenario, const TensorizeOptions & options)
{
  if (scenario.frame != Frame::kEgo) throw Error(kModule, "tensorize requires the EGO frame");
  SceneTensors t;
  t.num_agent_slots = options.max_agents + 1;
  t.history_len = options.history_steps + 1;
  t.future_len = options.future_steps;
  t.num_map_slots = options.max_polylines;
  t.num_route_slots = options.max_routes;
  t.points_per_polyline = options.max_points;

  const int slots = t.num_agent_slots;
  t.agent_features = RowMatrixXd::Zero(slots * t.history_len, kAgentFeatureDim);
  t.agent_step_mask = BoolArray::Constant(slots * t.history_len, false);
  t.agent_mask = BoolArray::Constant(slots, false);
  t.agent_ids.assign(slots, -1);
  t.agent_source.assign(slots, -1);
  t.agent_kinds.assign(slots, AgentKind::kCar);
  t.agent_footprints.assign(slots, Footprint{});
  t.agent_pose = RowMatrixXd::Zero(slots, 3);
  t.gt_future = RowMatrixXd::Zero(slots * t.future_len, 2);
  t.gt_future_mask = BoolArray::Constant(slots * t.future_len, false);

  std::vector<double> distance;
  std::vector<std::int64_t> ids;
  for (const auto & agent : scenario.agents) {
    const auto & s = agent.current();
    distance.push_back(s.valid ? s.position().norm() : std::numeric_limits<double>::infinity());
    ids.push_back(agent.id);
  }
  const auto kept = keep_nearest(distance, ids, options.max_agents);

  auto write_agent = [&](const AgentHistory & agent, int slot) {
    const int n = static_cast<int>(agent.states.size());
    for (int step = 0; step < t.history_len; ++step) {
      // Align on t0; missing older steps stay as padding.
      const int src = n - t.history_len + step;
      if (src < 0) continue;
      const auto & s = agent.states[src];
      if (!s.valid) continue;
      const int row = slot * t.history_len + step;
      auto f = t.agent_features.row(row);
      f(0) = s.x;
      f(1) = s.y;
      f(2) = std::cos(s.heading);
      f(3) = std::sin(s.heading);
      f(4) = s.vx;
      f(5) = s.vy;
      f(6 + static_cast<int>(agent.kind)) = 1.0;
      f(kAgentFeatureDim - 1) = 1.0;
      t.agent_step_mask(row) = true;
    }
    const auto & cur = agent.current();
    t.agent_mask(slot) = cur.valid;
    t.agent_ids[slot] = agent.id;
    t.agent_kinds[slot] = agent.kind;
    t.agent_footprints[slot] = agent.footprint;
    if (cur.valid) t.agent_pose.row(slot) << cur.x, cur.y, cur.heading;
    auto it = scenario.gt_futures.find(agent.id);
    if (it != scenario.gt_futures.end() && cur.valid) {
      const auto & track = it->second;
      const int n_future = std::min<int>(static_cast<int>(track.size()), t.future_len);
      for (int step = 0; step < n_future; ++step) {
        if (!track[step].valid) continue;
        const int row = slot * t.future_len + step;
        t.gt_future.row(row) << track[step].x, track[step].y;
        t.gt_future_mask(row) = true;
      }
    }
  };
  write_agent(scenario.ego, 0);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    write_agent(scenario.agents[kept[i]], static_cast<int>(i) + 1);
    t.agent_source[i + 1] = kept[i];
  }

  t.map_features = RowMatrixXd::Zero(t.num_map_slots * t.points_per_polyline, kPolylineFeatureDim);
  t.map_point_mask = BoolArray::Constant(t.num_map_slots * t.points_per_polyline, false);
  t.map_mask = BoolArray::Constant(t.num_map_slots, false);
  t.map_source.assign(t.num_map_slots, -1);
  {
    std::vector<double> d;
    std::vector<std::int64_t> line_ids;
    for (const auto & line : scenario.map) {
      d.push_back(polyline_distance_to_origin(line));
      line_ids.push_back(line.id);
    }
    const auto kept_lines = keep_nearest(d, line_ids, options.max_polylines);
    for (std::size_t i = 0; i < kept_lines.size(); ++i) {
      write_polyline(
        scenario.map[kept_lines[i]], static_cast<int>(i), t.points_per_polyline, t.map_features,
        t.map_point_mask);
      t.map_mask(i) = true;
      t.map_source[i] = kept_lines[i];
    }
  }

  t.route_features =
    RowMatrixXd::Zero(t.num_route_slots * t.points_per_polyline, kPolylineFeatureDim);
  t.route_point_mask = BoolArray::Constant(t.num_route_slots * t.points_per_polyline, false);
  t.route_mask = BoolArray::Constant(t.num_route_slots, false);
  t.route_is_primary = BoolArray::Constant(t.num_route_slots, false);
  {
    // Routes are kept primary first, then secondary, each in declaration order.
    int slot = 0;
    for (const auto * group : {&scenario.routes.primary, &scenario.routes.secondary}) {
      for (const auto & line : *group) {
        if (slot >= t.num_route_slots) break;
        write_polyline(line, slot, t.points_per_polyline, t.route_features, t.route_point_mask);
        t.route_mask(slot) = true;
        t.route_is_primary(slot) = group == &scenario.routes.primary;
        ++slot;
      }
    }
  }
  return t;
}

}  // namespace int2plan
