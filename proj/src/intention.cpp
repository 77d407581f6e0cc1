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

#include "int2plan/intention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "int2plan/error.hpp"

namespace int2plan {

namespace {

constexpr const char * kModule = "intention";
constexpr int kMaxLloydIterations = 50;
constexpr double kRelativeTolerance = 1e-6;

std::vector<IntentionPoint> tagged(const std::vector<Vec2> & points, IntentionSource source)
{
  std::vector<IntentionPoint> out;
  out.reserve(points.size());
  for (const auto & p : points) out.push_back({p, source, true});
  return out;
}

double assign_and_score(
  std::span<const Vec2> points, const std::vector<Vec2> & centers, std::vector<int> & assignment)
{
  double objective = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_index = 0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const double d = (points[i] - centers[c]).squaredNorm();
      if (d < best) {
        best = d;
        best_index = static_cast<int>(c);
      }
    }
    assignment[i] = best_index;
    objective += best;
  }
  return objective;
}

}  // namespace

std::string_view to_string(IntentionSource source)
{
  switch (source) {
    case IntentionSource::kRoutePrimary:
      return "ROUTE_PRIMARY";
    case IntentionSource::kRouteSecondary:
      return "ROUTE_SECONDARY";
    case IntentionSource::kCluster:
      return "CLUSTER";
  }
  return "CLUSTER";
}

std::vector<Vec2> resample_polyline(const Polyline & polyline, double interval)
{
  if (!(interval > 0.0)) throw Error(kModule, "resample interval must be positive");
  std::vector<double> cumulative(polyline.points.size(), 0.0);
  for (std::size_t i = 1; i < polyline.points.size(); ++i) {
    cumulative[i] = cumulative[i - 1] + (polyline.points[i] - polyline.points[i - 1]).norm();
  }
  const double total = cumulative.empty() ? 0.0 : cumulative.back();
  std::vector<Vec2> out;
  std::size_t segment = 0;
  for (int k = 1;; ++k) {
    const double s = k * interval;
    if (s > total + 1e-9) break;
    if (s >= total) {
      out.push_back(polyline.points.back());
      break;
    }
    while (segment + 2 < cumulative.size() && cumulative[segment + 1] < s) ++segment;
    const Vec2 & a = polyline.points[segment];
    const Vec2 & b = polyline.points[segment + 1];
    const double u = (s - cumulative[segment]) / (cumulative[segment + 1] - cumulative[segment]);
    out.push_back(a + u * (b - a));
  }
  return out;
}

IntentionRow pad_intentions(std::vector<IntentionPoint> points, int num_intentions)
{
  if (static_cast<int>(points.size()) > num_intentions) points.resize(num_intentions);
  IntentionPoint pad;
  if (!points.empty()) {
    pad = points.back();
    pad.valid = false;
  }
  points.resize(num_intentions, pad);
  return points;
}

IntentionRow sample_route_intentions(const RouteSet & routes, double interval, int num_intentions)
{
  if (routes.primary.empty()) throw Error(kModule, "empty primary route");
  std::vector<IntentionPoint> points;
  for (const auto & line : routes.primary) {
    auto p = tagged(resample_polyline(line, interval), IntentionSource::kRoutePrimary);
    points.insert(points.end(), p.begin(), p.end());
  }
  for (const auto & line : routes.secondary) {
    auto p = tagged(resample_polyline(line, interval), IntentionSource::kRouteSecondary);
    points.insert(points.end(), p.begin(), p.end());
  }
  if (points.empty()) {
    // Route shorter than one interval: fall back to its endpoint so the ego
    // keeps at least one valid intention.
    points.push_back({routes.primary.back().points.back(), IntentionSource::kRoutePrimary, true});
  }
  return pad_intentions(std::move(points), num_intentions);
}

ClusterResult cluster_intentions(
  std::span<const Vec2> endpoints, int num_intentions, std::uint64_t seed)
{
  if (endpoints.empty()) throw Error(kModule, "no endpoints to cluster");
  if (num_intentions < 1) throw Error(kModule, "number of intentions must be positive");
  ClusterResult result;

  std::vector<Vec2> distinct;
  for (const auto & p : endpoints) {
    const bool seen = std::any_of(distinct.begin(), distinct.end(), [&](const Vec2 & q) {
      return q == p;
    });
    if (!seen) distinct.push_back(p);
    if (static_cast<int>(distinct.size()) > num_intentions) break;
  }
  if (static_cast<int>(distinct.size()) <= num_intentions) {
    result.centers = pad_intentions(tagged(distinct, IntentionSource::kCluster), num_intentions);
    return result;
  }

  std::mt19937_64 rng(seed);
  std::vector<Vec2> centers;
  centers.reserve(num_intentions);
  centers.push_back(endpoints[std::uniform_int_distribution<std::size_t>(0, endpoints.size() - 1)(rng)]);
  std::vector<double> nearest(endpoints.size(), std::numeric_limits<double>::infinity());
  while (static_cast<int>(centers.size()) < num_intentions) {
    double total = 0.0;
    for (std::size_t i = 0; i < endpoints.size(); ++i) {
      nearest[i] = std::min(nearest[i], (endpoints[i] - centers.back()).squaredNorm());
      total += nearest[i];
    }
    double target = std::uniform_real_distribution<double>(0.0, total)(rng);
    std::size_t pick = endpoints.size() - 1;
    for (std::size_t i = 0; i < endpoints.size(); ++i) {
      if (nearest[i] <= 0.0) continue;
      target -= nearest[i];
      if (target <= 0.0) {
        pick = i;
        break;
      }
    }
    while (nearest[pick] <= 0.0) --pick;
    centers.push_back(endpoints[pick]);
  }

  std::vector<int> assignment(endpoints.size(), 0);
  double previous = assign_and_score(endpoints, centers, assignment);
  for (int iteration = 0; iteration < kMaxLloydIterations; ++iteration) {
    std::vector<Vec2> sums(centers.size(), Vec2::Zero());
    std::vector<int> counts(centers.size(), 0);
    for (std::size_t i = 0; i < endpoints.size(); ++i) {
      sums[assignment[i]] += endpoints[i];
      ++counts[assignment[i]];
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (counts[c] > 0) centers[c] = sums[c] / counts[c];
    }
    const double objective = assign_and_score(endpoints, centers, assignment);
    result.objective_history.push_back(objective);
    const double change = previous - objective;
    if (previous <= 0.0 || change <= kRelativeTolerance * previous) break;
    previous = objective;
  }
  result.centers = tagged(centers, IntentionSource::kCluster);
  return result;
}

int select_positive_intention(const IntentionRow & row, const Vec2 & endpoint)
{
  int best = -1;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (!row[i].valid) continue;
    const double d = (row[i].position - endpoint).squaredNorm();
    if (d < best_distance) {
      best_distance = d;
      best = static_cast<int>(i);
    }
  }
  if (best < 0) throw Error(kModule, "no valid intention slots");
  return best;
}

IntentionRow place_intentions(const IntentionRow & centers, const Vec2 & position, double heading)
{
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  IntentionRow out = centers;
  for (auto & p : out) {
    const Vec2 local = p.position;
    p.position = position + Vec2(c * local.x() - s * local.y(), s * local.x() + c * local.y());
  }
  return out;
}

std::optional<Vec2> agent_centric_endpoint(const AgentHistory & agent, const FutureTrack & future)
{
  const auto & cur = agent.current();
  if (!cur.valid) return std::nullopt;
  for (auto it = future.rbegin(); it != future.rend(); ++it) {
    if (!it->valid) continue;
    return RigidTransform{cur.position(), cur.heading}.apply(it->position());
  }
  return std::nullopt;
}

}  // namespace int2plan
