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

#include "int2plan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "int2plan/error.hpp"
#include "int2plan/geometry.hpp"

namespace int2plan {

namespace {

void check_shapes(const Trajectory & pred, const Trajectory & gt, const BoolArray & mask)
{
  if (pred.rows() != gt.rows() || mask.size() != gt.rows()) {
    throw Error("metrics", "trajectory and mask lengths differ");
  }
  if (!mask.any()) throw Error("metrics", "empty mask");
}

OrientedBox box_at(const Vec2 & p, double heading, const Footprint & fp)
{
  return {p, heading, fp.length, fp.width};
}

}  // namespace

double ade(const Trajectory & pred, const Trajectory & gt, const BoolArray & mask)
{
  check_shapes(pred, gt, mask);
  double total = 0.0;
  int count = 0;
  for (Eigen::Index t = 0; t < gt.rows(); ++t) {
    if (!mask(t)) continue;
    total += (pred.row(t) - gt.row(t)).norm();
    ++count;
  }
  return total / count;
}

double fde(const Trajectory & pred, const Trajectory & gt, const BoolArray & mask)
{
  check_shapes(pred, gt, mask);
  Eigen::Index last = gt.rows() - 1;
  while (!mask(last)) --last;
  return (pred.row(last) - gt.row(last)).norm();
}

double min_over_top_k(
  const std::vector<Trajectory> & modes, const Eigen::VectorXd & scores, const BoolArray & valid_modes,
  const Trajectory & gt, const BoolArray & mask, int k, DisplacementMetric metric)
{
  const auto m = static_cast<Eigen::Index>(modes.size());
  if (scores.size() != m || valid_modes.size() != m) throw Error("metrics", "mode count mismatch");
  std::vector<Eigen::Index> order;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (valid_modes(i)) order.push_back(i);
  }
  if (order.empty()) throw Error("metrics", "no valid modes");
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores(a) > scores(b); });
  if (static_cast<int>(order.size()) > k) order.resize(k);
  double best = std::numeric_limits<double>::infinity();
  for (auto i : order) {
    const double v = metric == DisplacementMetric::kAde ? ade(modes[i], gt, mask) : fde(modes[i], gt, mask);
    best = std::min(best, v);
  }
  return best;
}

std::vector<Vec2> primary_route_points(const RouteSet & routes)
{
  std::vector<Vec2> pts;
  for (const auto & pl : routes.primary) {
    for (const auto & p : pl.points) {
      if (!pts.empty() && (pts.back() - p).norm() <= 1e-9) continue;
      pts.push_back(p);
    }
  }
  return pts;
}

ScoreCard score_rollout(const Rollout & rollout, const Scenario & scenario, const ScoreOptions & options)
{
  if (rollout.scenario_id != scenario.id) {
    throw Error("metrics", "rollout belongs to '" + rollout.scenario_id + "', not '" + scenario.id + "'");
  }
  if (rollout.ego.empty()) throw Error("metrics", "empty rollout");
  for (const auto & a : rollout.agents) {
    if (a.states.size() != rollout.ego.size()) throw Error("metrics", "agent track length differs from ego");
  }
  const auto route = primary_route_points(scenario.routes);
  if (route.size() < 2) throw Error("metrics", "scenario has no primary route");
  const int steps = rollout.steps();
  ScoreCard card;

  for (std::size_t i = 0; i < rollout.ego.size() && !card.collision; ++i) {
    const auto & e = rollout.ego[i];
    const auto ego_box = box_at(e.position(), e.heading, rollout.ego_footprint);
    for (const auto & a : rollout.agents) {
      const auto & s = a.states[i];
      if (s.valid && box_overlap(ego_box, box_at(s.position(), s.heading, a.footprint))) {
        card.collision = true;
        break;
      }
    }
  }

  for (const auto & e : rollout.ego) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto * group : {&scenario.routes.primary, &scenario.routes.secondary}) {
      for (const auto & pl : *group) nearest = std::min(nearest, project_onto_polyline(pl.points, e.position()).distance);
    }
    if (nearest > options.corridor_half_width) {
      card.drivable_violation = true;
      break;
    }
  }

  // Progress relative to the logged ego over the same horizon.
  const auto start = project_onto_polyline(route, rollout.ego.front().position()).arc_length;
  const auto end = project_onto_polyline(route, rollout.ego.back().position()).arc_length;
  Vec2 log_end = scenario.ego.current().position();
  const auto & future = scenario.future_of(scenario.ego.id);
  for (int i = 0; i < std::min<int>(steps, static_cast<int>(future.size())); ++i) {
    if (future[i].valid) log_end = future[i].position();
  }
  const auto log_start = project_onto_polyline(route, scenario.ego.current().position()).arc_length;
  const double log_progress = project_onto_polyline(route, log_end).arc_length - log_start;
  const double progress = end - start;
  if (log_progress < 1e-6) {
    card.progress_ratio = progress >= -1e-6 ? 1.0 : 0.0;
  } else {
    card.progress_ratio = std::clamp(progress / log_progress, 0.0, 1.0);
  }

  // Comfort over finite-difference acceleration and jerk.
  if (steps >= 1) {
    int ok = 0;
    double prev_accel = 0.0;
    for (int i = 0; i < steps; ++i) {
      const double accel = (rollout.ego[i + 1].v - rollout.ego[i].v) / rollout.dt;
      const double jerk = i == 0 ? 0.0 : (accel - prev_accel) / rollout.dt;
      if (std::abs(accel) <= options.max_accel && std::abs(jerk) <= options.max_jerk) ++ok;
      prev_accel = accel;
    }
    card.comfort = static_cast<double>(ok) / steps;
  } else {
    card.comfort = 1.0;
  }

  int compliant = 0;
  for (const auto & e : rollout.ego) {
    if (e.v <= scenario.speed_limit + 1e-9) ++compliant;
  }
  card.speed_compliance = static_cast<double>(compliant) / static_cast<double>(rollout.ego.size());

  if (card.collision || card.drivable_violation) {
    card.composite = 0.0;
  } else {
    const double w = options.progress_weight + options.comfort_weight + options.speed_weight;
    card.composite = (options.progress_weight * card.progress_ratio + options.comfort_weight * card.comfort +
                      options.speed_weight * card.speed_compliance) / w;
  }
  return card;
}

std::string score_csv(const std::vector<ScoreRow> & rows)
{
  std::ostringstream out;
  out << "scenario_id,mode,collision,drivable,progress,comfort,speed,composite\n";
  char buf[256];
  ScoreCard mean;
  double collisions = 0.0, violations = 0.0;
  for (const auto & r : rows) {
    const auto & c = r.card;
    std::snprintf(
      buf, sizeof(buf), ",%d,%d,%.6f,%.6f,%.6f,%.6f\n", c.collision ? 1 : 0, c.drivable_violation ? 1 : 0,
      c.progress_ratio, c.comfort, c.speed_compliance, c.composite);
    out << r.scenario_id << ',' << to_string(r.mode) << buf;
    collisions += c.collision;
    violations += c.drivable_violation;
    mean.progress_ratio += c.progress_ratio;
    mean.comfort += c.comfort;
    mean.speed_compliance += c.speed_compliance;
    mean.composite += c.composite;
  }
  if (!rows.empty()) {
    const double n = static_cast<double>(rows.size());
    std::snprintf(
      buf, sizeof(buf), "mean,all,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", collisions / n, violations / n,
      mean.progress_ratio / n, mean.comfort / n, mean.speed_compliance / n, mean.composite / n);
    out << buf;
  }
  return out.str();
}

}  // namespace int2plan
