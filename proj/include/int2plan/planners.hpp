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

#include <memory>

#include "int2plan/simulator.hpp"
#include "int2plan/training.hpp"

namespace int2plan {

/// Returns the logged ego future of the observation.
Planner make_log_replay_planner();

/// Car following along the primary route at the speed limit, with the
/// nearest agent ahead (constant-velocity forecast) as leader.
Planner make_idm_planner(const IdmParams & params = {}, int horizon_steps = 0);

/// Highest-confidence plan of the final iteration; top-1 predictions of the
/// other agents go out for post-processing.
Planner make_model_planner(std::shared_ptr<const TrainedModel> trained);

}  // namespace int2plan
