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

#include "int2plan/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace int2plan {

std::array<Vec2, 4> OrientedBox::corners() const
{
  const Vec2 forward(std::cos(heading), std::sin(heading));
  const Vec2 left(-forward.y(), forward.x());
  const Vec2 f = 0.5 * length * forward;
  const Vec2 l = 0.5 * width * left;
  return {center + f + l, center - f + l, center - f - l, center + f - l};
}

std::optional<double> box_overlap(const OrientedBox & a, const OrientedBox & b)
{
  const auto ca = a.corners();
  const auto cb = b.corners();
  const std::array<Vec2, 4> axes = {
    Vec2(std::cos(a.heading), std::sin(a.heading)), Vec2(-std::sin(a.heading), std::cos(a.heading)),
    Vec2(std::cos(b.heading), std::sin(b.heading)), Vec2(-std::sin(b.heading), std::cos(b.heading))};
  double depth = std::numeric_limits<double>::infinity();
  for (const auto & axis : axes) {
    double min_a = std::numeric_limits<double>::infinity();
    double max_a = -min_a;
    double min_b = min_a;
    double max_b = -min_a;
    for (const auto & c : ca) {
      const double d = c.dot(axis);
      min_a = std::min(min_a, d);
      max_a = std::max(max_a, d);
    }
    for (const auto & c : cb) {
      const double d = c.dot(axis);
      min_b = std::min(min_b, d);
      max_b = std::max(max_b, d);
    }
    const double overlap = std::min(max_a, max_b) - std::max(min_a, min_b);
    if (overlap <= 0.0) return std::nullopt;
    depth = std::min(depth, overlap);
  }
  return depth;
}

double point_segment_distance(const Vec2 & p, const Vec2 & a, const Vec2 & b)
{
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double u = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + u * ab - p).norm();
}

double box_distance(const OrientedBox & a, const OrientedBox & b)
{
  if (box_overlap(a, b)) return 0.0;
  const auto ca = a.corners();
  const auto cb = b.corners();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      best = std::min(best, point_segment_distance(ca[i], cb[j], cb[(j + 1) % 4]));
      best = std::min(best, point_segment_distance(cb[j], ca[i], ca[(i + 1) % 4]));
    }
  }
  return best;
}

PolylineProjection project_onto_polyline(std::span<const Vec2> points, const Vec2 & p)
{
  PolylineProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  double start = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const Vec2 & a = points[i];
    const Vec2 ab = points[i + 1] - a;
    const double len = ab.norm();
    if (len <= 0.0) continue;
    const Vec2 dir = ab / len;
    const double u = std::clamp((p - a).dot(dir), 0.0, len);
    const Vec2 foot = a + u * dir;
    const double d = (p - foot).norm();
    if (d < best.distance) {
      best.distance = d;
      best.arc_length = start + u;
      best.segment = i;
      const Vec2 rel = p - a;
      best.lateral = dir.x() * rel.y() - dir.y() * rel.x();
    }
    start += len;
  }
  return best;
}

std::vector<double> headings_from_points(std::span<const Vec2> points, double initial)
{
  std::vector<double> headings(points.size(), initial);
  double last = initial;
  for (std::size_t i = 0; i < points.size(); ++i) {
    Vec2 d;
    if (i + 1 < points.size()) d = points[i + 1] - points[i];
    else if (i > 0) d = points[i] - points[i - 1];
    else d = Vec2::Zero();
    if (d.norm() > 1e-6) last = std::atan2(d.y(), d.x());
    headings[i] = last;
  }
  return headings;
}

}  // namespace int2plan
