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

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "int2plan/scene.hpp"

namespace int2plan {

struct OrientedBox
{
  Vec2 center = Vec2::Zero();
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;

  std::array<Vec2, 4> corners() const;
  OrientedBox inflated(double margin) const
  {
    return {center, heading, length + 2.0 * margin, width + 2.0 * margin};
  }
};

/// Separating-axis test. Returns the minimum penetration depth over the four
/// candidate axes when the boxes overlap, nullopt otherwise. Touching boxes
/// do not overlap.
std::optional<double> box_overlap(const OrientedBox & a, const OrientedBox & b);

/// Euclidean distance between two boxes (0 when they overlap).
double box_distance(const OrientedBox & a, const OrientedBox & b);

double point_segment_distance(const Vec2 & p, const Vec2 & a, const Vec2 & b);

struct PolylineProjection
{
  double arc_length = 0.0;  // along the polyline
  double lateral = 0.0;     // signed, positive to the left
  double distance = 0.0;
  std::size_t segment = 0;
};

/// Nearest-point projection of `p` onto the polyline.
PolylineProjection project_onto_polyline(std::span<const Vec2> points, const Vec2 & p);

/// Headings along a trajectory from consecutive point differences. Stationary
/// steps inherit the previous heading; the first falls back to `initial`.
std::vector<double> headings_from_points(std::span<const Vec2> points, double initial);

}  // namespace int2plan
