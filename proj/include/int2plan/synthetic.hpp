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

#include <cstdint>
#include <string_view>

#include "int2plan/scene.hpp"
#include "int2plan/simulator.hpp"

namespace int2plan {

enum class SyntheticKind { kStraight, kStopBehindLead, kLaneChange, kUnprotectedLeft };

std::string_view to_string(SyntheticKind kind);
/// "straight", "stop-behind-lead", "lane-change", "unprotected-left".
SyntheticKind parse_synthetic_kind(std::string_view name);

struct SyntheticOptions
{
  int history_steps = 15;
  int future_steps = 50;
  /// Place the scene at a random global pose instead of the ego frame.
  bool random_pose = true;
  /// Car-following model used for IDM-generated logs.
  IdmParams idm;
};

/// Procedural GLOBAL-frame scenario. Identical (kind, seed, options) give
/// identical scenarios.
Scenario gen_synthetic(SyntheticKind kind, std::uint64_t seed, const SyntheticOptions & options = {});

}  // namespace int2plan
