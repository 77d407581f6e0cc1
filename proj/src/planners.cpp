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

#include "int2plan/planners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "int2plan/geometry.hpp"
#include "int2plan/metrics.hpp"

namespace int2plan {

Planner make_log_replay_planner()
{
  return [](const Scenario & obs) {
    PlannerOutput out;
    Vec2 last = obs.ego.current().position();
    for (const auto & p : obs.future_of(obs.ego.id)) {
      if (p.valid) last = p.position();
      out.trajectory.push_back(last);
    }
    return out;
  };
}

Planner make_idm_planner(const IdmParams & params, int horizon_steps)
{
  return [params, horizon_steps](const Scenario & obs) {
    const int steps = horizon_steps > 0 ? horizon_steps : obs.future_steps();
    const auto route = primary_route_points(obs.routes);
    if (route.size() < 2) throw Error("simulator", "IDM planner needs a primary route");
    std::vector<double> arc(route.size(), 0.0);
    for (std::size_t i = 1; i < route.size(); ++i) arc[i] = arc[i - 1] + (route[i] - route[i - 1]).norm();
    auto point_at = [&](double s) {
      if (s >= arc.back()) {
        const Vec2 dir = (route.back() - route[route.size() - 2]).normalized();
        return Vec2(route.back() + (s - arc.back()) * dir);
      }
      auto it = std::upper_bound(arc.begin(), arc.end(), s);
      const std::size_t j = it == arc.begin() ? 0 : static_cast<std::size_t>(it - arc.begin()) - 1;
      return Vec2(route[j] + ((s - arc[j]) / (arc[j + 1] - arc[j])) * (route[j + 1] - route[j]));
    };

    IdmParams p = params;
    p.desired_speed = obs.speed_limit;
    const auto & ego = obs.ego.current();
    double s = project_onto_polyline(route, ego.position()).arc_length;
    double v = ego.speed();
    PlannerOutput out;
    for (int i = 1; i <= steps; ++i) {
      double gap = std::numeric_limits<double>::infinity();
      double closing = 0.0;
      for (const auto & a : obs.agents) {
        const auto & st = a.current();
        if (!st.valid) continue;
        const Vec2 pos = st.position() + st.velocity() * ((i - 1) * obs.dt);
        const auto proj = project_onto_polyline(route, pos);
        if (proj.distance > 2.0 || proj.arc_length <= s) continue;
        const double g = proj.arc_length - s - 0.5 * (obs.ego.footprint.length + a.footprint.length);
        if (g < gap) {
          gap = g;
          const Vec2 d = route[proj.segment + 1] - route[proj.segment];
          closing = v - st.velocity().dot(d.normalized());
        }
      }
      const double acc = idm_accel(v, gap, closing, p);
      s += std::max(0.0, v * obs.dt + 0.5 * acc * obs.dt * obs.dt);
      v = std::max(0.0, v + acc * obs.dt);
      out.trajectory.push_back(point_at(s));
    }
    return out;
  };
}

Planner make_model_planner(std::shared_ptr<const TrainedModel> trained)
{
  return [trained](const Scenario & obs) {
    const auto & cfg = trained->config.model;
    const auto prep = prepare_scene(obs, cfg, trained->clusters);
    nn::Graph<float> g(false);
    const auto out = trained->model->forward(g, prep.tensors, prep.intentions);
    const int k = out.num_iterations() - 1;
    auto pick = [](const Eigen::VectorXd & scores, const nn::Mask & valid) {
      int best = -1;
      for (Eigen::Index i = 0; i < scores.size(); ++i) {
        if (valid(i) && (best < 0 || scores(i) > scores(best))) best = static_cast<int>(i);
      }
      return best;
    };
    PlannerOutput result;
    const auto scores = out.plan_scores(k);
    const int m = pick(scores, out.intention_masks[0]);
    result.confidence = scores(m);
    const auto plan = out.plan(k, m);
    for (Eigen::Index t = 0; t < plan.rows(); ++t) result.trajectory.emplace_back(plan(t, 0), plan(t, 1));
    const auto & tensors = prep.tensors;
    for (int a = 1; a < tensors.num_agent_slots; ++a) {
      if (!out.agent_decoded(a)) continue;
      const auto best = out.prediction(k, a, pick(out.prediction_scores(k, a), out.intention_masks[a]));
      AgentPrediction p;
      p.id = tensors.agent_ids[a];
      p.footprint = tensors.agent_footprints[a];
      p.initial_heading = tensors.agent_pose(a, 2);
      for (Eigen::Index t = 0; t < best.rows(); ++t) p.points.emplace_back(best(t, 0), best(t, 1));
      result.predictions.push_back(std::move(p));
    }
    return result;
  };
}

}  // namespace int2plan
