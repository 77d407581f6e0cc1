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

#include "int2plan/postprocess.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "int2plan/error.hpp"
#include "int2plan/geometry.hpp"
#include "int2plan/logging.hpp"

namespace int2plan {

std::vector<Conflict> check_collisions(
  std::span<const Vec2> plan, std::span<const double> headings, const Footprint & ego,
  std::span<const AgentPrediction> predictions, double margin)
{
  if (headings.size() != plan.size()) throw Error("postprocess", "plan headings do not match plan length");
  std::vector<std::vector<double>> agent_headings;
  for (const auto & p : predictions) {
    if (p.points.size() != plan.size()) {
      throw Error("postprocess", "timebase mismatch for agent " + std::to_string(p.id));
    }
    agent_headings.push_back(headings_from_points(p.points, p.initial_heading));
  }
  std::vector<Conflict> out;
  for (std::size_t t = 0; t < plan.size(); ++t) {
    const OrientedBox ego_box = OrientedBox{plan[t], headings[t], ego.length, ego.width}.inflated(margin);
    for (std::size_t a = 0; a < predictions.size(); ++a) {
      const auto & p = predictions[a];
      const OrientedBox box{p.points[t], agent_headings[a][t], p.footprint.length, p.footprint.width};
      if (auto depth = box_overlap(ego_box, box)) {
        out.push_back({static_cast<int>(t), p.id, *depth});
      }
    }
  }
  return out;
}

std::vector<Vec2> clamp_lateral(std::span<const Vec2> plan, const ReferenceLine & reference, double limit)
{
  std::vector<Vec2> out(plan.begin(), plan.end());
  std::optional<double> hint;
  for (auto & p : out) {
    const auto f = reference.to_frenet(p, hint);
    hint = f.s;
    if (std::abs(f.l) > limit + 1e-9) p = reference.from_frenet(f.s, std::copysign(limit, f.l));
  }
  return out;
}

namespace {

/// Positions along a fixed path for a given arc-length profile.
class PathProfile
{
public:
  PathProfile(const Vec2 & start, std::span<const Vec2> plan) : path_{start}
  {
    path_.insert(path_.end(), plan.begin(), plan.end());
    arc_.assign(path_.size(), 0.0);
    for (std::size_t i = 1; i < path_.size(); ++i) arc_[i] = arc_[i - 1] + (path_[i] - path_[i - 1]).norm();
  }

  /// Arc length of each plan point (path index 1..T).
  std::vector<double> initial() const { return {arc_.begin() + 1, arc_.end()}; }

  Vec2 at(double s) const
  {
    // Last path point whose arc length is <= s, so unchanged steps map back
    // onto their original coordinates exactly.
    auto it = std::upper_bound(arc_.begin(), arc_.end(), s);
    std::size_t j = it == arc_.begin() ? 0 : static_cast<std::size_t>(it - arc_.begin()) - 1;
    if (arc_[j] == s || j + 1 >= path_.size()) return path_[j];
    const double len = arc_[j + 1] - arc_[j];
    return path_[j] + ((s - arc_[j]) / len) * (path_[j + 1] - path_[j]);
  }

  std::vector<Vec2> positions(const std::vector<double> & profile) const
  {
    std::vector<Vec2> out;
    out.reserve(profile.size());
    for (double s : profile) out.push_back(at(s));
    return out;
  }

private:
  std::vector<Vec2> path_;
  std::vector<double> arc_;
};

std::vector<double> plan_headings(const Vec2 & start, double start_heading, const std::vector<Vec2> & plan)
{
  std::vector<Vec2> path{start};
  path.insert(path.end(), plan.begin(), plan.end());
  auto h = headings_from_points(path, start_heading);
  return {h.begin() + 1, h.end()};
}

/// Second-difference smoothing with both profile endpoints pinned, capped at
/// `upper` and kept non-decreasing.
std::vector<double> smooth_profile(const std::vector<double> & upper, double weight)
{
  const auto n = static_cast<Eigen::Index>(upper.size()) + 1;  // index 0 is the start
  if (n < 3) return upper;
  Eigen::VectorXd target(n);
  target(0) = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) target(i) = upper[i - 1];
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n - 2, n);
  for (Eigen::Index i = 0; i + 2 < n; ++i) {
    d(i, i) = 1.0;
    d(i, i + 1) = -2.0;
    d(i, i + 2) = 1.0;
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) + weight * d.transpose() * d;
  Eigen::VectorXd rhs = target;
  for (Eigen::Index pinned : {Eigen::Index(0), n - 1}) {
    a.row(pinned).setZero();
    a(pinned, pinned) = 1.0;
  }
  const Eigen::VectorXd x = a.partialPivLu().solve(rhs);
  std::vector<double> out(upper.size());
  double running = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    running = std::max(running, std::min(x(i), upper[i - 1]));
    out[i - 1] = running;
  }
  return out;
}

}  // namespace

RefineResult refine_trajectory(
  std::span<const Vec2> plan, const ReferenceLine & reference, std::span<const AgentPrediction> predictions,
  const Footprint & ego, const RefineParams & params, const Vec2 & start, double start_heading)
{
  RefineResult result;
  if (plan.empty()) throw Error("postprocess", "empty plan");
  result.plan = clamp_lateral(plan, reference, params.lateral_limit);

  std::optional<double> hint;
  double furthest = 0.0;
  for (const auto & p : result.plan) {
    const auto f = reference.to_frenet(p, hint);
    hint = f.s;
    furthest = std::max(furthest, f.s);
  }
  auto conflicts_of = [&](const std::vector<Vec2> & pts) {
    return check_collisions(pts, plan_headings(start, start_heading, pts), ego, predictions, params.safety_margin);
  };
  auto conflicts = conflicts_of(result.plan);
  result.conflict_counts.push_back(static_cast<int>(conflicts.size()));
  if (furthest > reference.length() + 1e-9) {
    result.clamp_only = true;
    result.feasible = conflicts.empty();
    logger()->debug("postprocess: reference shorter than plan, clamp-only mode");
    return result;
  }
  if (conflicts.empty()) return result;

  const PathProfile path(start, result.plan);
  auto profile = path.initial();
  const auto dt = params.dt;
  while (!conflicts.empty() && result.iterations < params.max_iterations) {
    ++result.iterations;
    const int c = conflicts.front().step;
    const double s_prev = c == 0 ? 0.0 : profile[c - 1];
    const double v_c = (profile[c] - s_prev) / dt;
    double backoff = params.min_backoff + params.time_headway * v_c;
    bool accepted = false;
    for (int attempt = 0; attempt < 6 && !accepted; ++attempt, backoff *= 2.0) {
      const double cap = std::max(0.0, profile[c] - backoff);
      auto candidate = profile;
      for (auto & s : candidate) s = std::min(s, cap);
      auto cand_conflicts = conflicts_of(path.positions(candidate));
      if (cand_conflicts.size() <= conflicts.size()) {
        profile = std::move(candidate);
        conflicts = std::move(cand_conflicts);
        accepted = true;
      }
    }
    if (!accepted) break;
    result.conflict_counts.push_back(static_cast<int>(conflicts.size()));
  }

  auto smoothed = smooth_profile(profile, params.smoothing_weight);
  auto smoothed_conflicts = conflicts_of(path.positions(smoothed));
  if (smoothed_conflicts.size() <= conflicts.size()) {
    profile = std::move(smoothed);
    conflicts = std::move(smoothed_conflicts);
    result.conflict_counts.push_back(static_cast<int>(conflicts.size()));
  }
  result.plan = path.positions(profile);
  result.feasible = conflicts.empty();
  return result;
}

}  // namespace int2plan
