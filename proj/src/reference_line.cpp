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

#include <algorithm>
#include <cmath>
#include <limits>

#include "int2plan/error.hpp"
#include "int2plan/postprocess.hpp"

namespace int2plan {

namespace {

constexpr double kWindowBehind = 5.0;
constexpr double kWindowAhead = 20.0;

}  // namespace

ReferenceLine::ReferenceLine(std::vector<Vec2> points) : points_(std::move(points))
{
  if (points_.size() < 2) throw Error("postprocess", "reference line needs at least two points");
  arc_.assign(points_.size(), 0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double d = (points_[i] - points_[i - 1]).norm();
    if (d <= 1e-12) throw Error("postprocess", "reference line has repeated points");
    arc_[i] = arc_[i - 1] + d;
  }
}

std::size_t ReferenceLine::segment_at(double s) const
{
  const auto it = std::upper_bound(arc_.begin(), arc_.end(), s);
  const auto idx = static_cast<std::ptrdiff_t>(it - arc_.begin()) - 1;
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(points_.size()) - 2));
}

FrenetPoint ReferenceLine::to_frenet(const Vec2 & p, std::optional<double> hint_s) const
{
  const std::size_t last = points_.size() - 2;
  auto search = [&](double lo, double hi, bool windowed) {
    FrenetPoint best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= last; ++i) {
      if (windowed && (arc_[i + 1] < lo || arc_[i] > hi)) continue;
      const Vec2 & a = points_[i];
      const Vec2 ab = points_[i + 1] - a;
      const double len = arc_[i + 1] - arc_[i];
      const Vec2 dir = ab / ab.norm();
      double u = (p - a).dot(dir);
      if (i > 0) u = std::max(u, 0.0);
      if (i < last) u = std::min(u, len);
      const Vec2 foot = a + u * dir;
      const double d = (p - foot).norm();
      if (d < best_d) {
        best_d = d;
        const Vec2 rel = p - a;
        best = {arc_[i] + u, dir.x() * rel.y() - dir.y() * rel.x()};
      }
    }
    return std::make_pair(best, best_d);
  };
  if (hint_s) {
    auto [fp, d] = search(*hint_s - kWindowBehind, *hint_s + kWindowAhead, true);
    if (std::isfinite(d)) return fp;
  }
  return search(0.0, 0.0, false).first;
}

Vec2 ReferenceLine::from_frenet(double s, double l) const
{
  const auto i = segment_at(s);
  const Vec2 & a = points_[i];
  const Vec2 ab = points_[i + 1] - a;
  const Vec2 dir = ab / ab.norm();
  const Vec2 normal(-dir.y(), dir.x());
  return a + (s - arc_[i]) * dir + l * normal;
}

ReferenceLine build_reference_line(const RouteSet & routes, double spacing)
{
  if (routes.primary.empty()) throw Error("postprocess", "empty primary route");
  if (!(spacing > 0.0)) throw Error("postprocess", "reference spacing must be positive");
  std::vector<Vec2> verts;
  for (const auto & pl : routes.primary) {
    for (const auto & p : pl.points) {
      if (!verts.empty() && (verts.back() - p).norm() <= 1e-9) continue;
      verts.push_back(p);
    }
  }
  if (verts.size() < 2) throw Error("postprocess", "primary route is degenerate");

  // Grid points every `spacing` metres plus the polyline vertices, so every
  // chord lies on the route and chord lengths sum to the route length.
  std::vector<Vec2> out{verts.front()};
  double seg_start = 0.0;
  double next = spacing;
  for (std::size_t i = 0; i + 1 < verts.size(); ++i) {
    const Vec2 ab = verts[i + 1] - verts[i];
    const double len = ab.norm();
    const double seg_end = seg_start + len;
    while (next < seg_end - 1e-9) {
      out.push_back(verts[i] + ((next - seg_start) / len) * ab);
      next += spacing;
    }
    if (std::abs(next - seg_end) <= 1e-9) next += spacing;
    out.push_back(verts[i + 1]);
    seg_start = seg_end;
  }
  return ReferenceLine(std::move(out));
}

}  // namespace int2plan
