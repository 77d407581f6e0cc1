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

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "int2plan/config.hpp"
#include "int2plan/intention.hpp"
#include "int2plan/model/planner_model.hpp"
#include "int2plan/nn/checkpoint.hpp"
#include "int2plan/scene.hpp"

namespace int2plan {

/// Model inputs for one scenario: ego-frame scene, tensors and intentions.
struct PreparedScene
{
  Scenario scene;
  SceneTensors tensors;
  IntentionSet intentions;
};

/// Normalizes (if needed), crops and tensorizes `scenario`, then builds one
/// intention row per agent slot. `clusters` are agent-centric centers.
PreparedScene prepare_scene(const Scenario & scenario, const ModelConfig & cfg, const IntentionRow & clusters);

/// Shared agent-centric cluster set from the GT endpoints of every agent
/// (ego included) in `dataset`.
IntentionRow compute_clusters(const std::vector<Scenario> & dataset, int num_intentions, std::uint64_t seed);

struct LossOptions
{
  bool prediction_loss = true;
  bool supervise_ego_prediction = true;
};

struct LossReport
{
  double total = 0.0;
  // One entry per iteration, each already averaged over supervised agents.
  std::vector<double> pred_regression;
  std::vector<double> pred_classification;
  std::vector<double> plan_regression;
  std::vector<double> plan_classification;
  /// Positive intention per agent slot, -1 where the slot is not supervised.
  std::vector<int> positive;
  int plan_positive = -1;
};

template <typename Scalar>
struct LossResult
{
  nn::Var<Scalar> total;
  LossReport report;
};

namespace detail {

inline std::optional<Vec2> last_valid_gt(const SceneTensors & t, int slot)
{
  for (int s = t.future_len - 1; s >= 0; --s) {
    const int r = slot * t.future_len + s;
    if (t.gt_future_mask(r)) return Vec2(t.gt_future(r, 0), t.gt_future(r, 1));
  }
  return std::nullopt;
}

template <typename Scalar>
nn::Var<Scalar> mean_of(const std::vector<nn::Var<Scalar>> & terms)
{
  return nn::scale(nn::add_all(terms), Scalar(1) / static_cast<Scalar>(terms.size()));
}

}  // namespace detail

/// L1 on the positive mode plus cross-entropy on the mode logits, for every
/// supervised agent and for the plan, averaged over the K iterations.
template <typename Scalar>
LossResult<Scalar> compute_loss(
  const model::MultiModalOutput<Scalar> & out, const SceneTensors & t, const IntentionSet & intentions,
  const LossOptions & options)
{
  using nn::Var;
  const int t_f = t.future_len;
  const int n_agents = intentions.num_agents();
  if (out.future_steps != t_f || static_cast<int>(out.intention_masks.size()) != n_agents) {
    throw Error("training", "model output does not match the scene tensors");
  }
  LossResult<Scalar> result;
  auto & report = result.report;
  report.positive.assign(n_agents, -1);

  std::vector<nn::Matrix<Scalar>> targets(n_agents);
  std::vector<nn::Mask> target_masks(n_agents);
  auto supervise = [&](int a) {
    auto end = detail::last_valid_gt(t, a);
    if (!end) return -1;
    targets[a] = t.gt_future.block(a * t_f, 0, t_f, 2).template cast<Scalar>();
    target_masks[a] = t.gt_future_mask.segment(a * t_f, t_f);
    return select_positive_intention(intentions.rows[a], *end);
  };
  if (options.prediction_loss) {
    for (int a = 0; a < n_agents; ++a) {
      if (!out.agent_decoded(a) || (a == 0 && !options.supervise_ego_prediction)) continue;
      report.positive[a] = supervise(a);
    }
  }
  report.plan_positive = supervise(0);

  auto & g = out.iterations.front().plan_trajectories.graph();
  std::vector<Var<Scalar>> iteration_totals;
  for (const auto & step : out.iterations) {
    std::vector<Var<Scalar>> reg, cls;
    for (int a = 0; a < n_agents; ++a) {
      const int pos = report.positive[a];
      if (pos < 0) continue;
      auto traj = nn::reshape(nn::slice_rows(step.pred_trajectories[a], pos, 1), t_f, 2);
      reg.push_back(nn::l1_loss(traj, targets[a], target_masks[a]));
      cls.push_back(nn::softmax_cross_entropy(step.pred_logits[a], pos, out.intention_masks[a]));
    }
    std::vector<Var<Scalar>> parts;
    auto note = [&](std::vector<double> & sink, const std::vector<Var<Scalar>> & terms) {
      if (terms.empty()) {
        sink.push_back(0.0);
        return;
      }
      auto m = detail::mean_of(terms);
      sink.push_back(static_cast<double>(m.value()(0, 0)));
      parts.push_back(m);
    };
    note(report.pred_regression, reg);
    note(report.pred_classification, cls);

    std::vector<Var<Scalar>> plan_reg, plan_cls;
    if (report.plan_positive >= 0) {
      const int pos = report.plan_positive;
      auto traj = nn::reshape(nn::slice_rows(step.plan_trajectories, pos, 1), t_f, 2);
      plan_reg.push_back(nn::l1_loss(traj, targets[0], target_masks[0]));
      plan_cls.push_back(nn::softmax_cross_entropy(step.plan_logits, pos, out.intention_masks[0]));
    }
    note(report.plan_regression, plan_reg);
    note(report.plan_classification, plan_cls);
    if (!parts.empty()) iteration_totals.push_back(nn::add_all(parts));
  }
  if (iteration_totals.empty()) {
    result.total = g.constant(nn::Matrix<Scalar>::Zero(1, 1));
  } else {
    result.total = nn::scale(nn::add_all(iteration_totals), Scalar(1) / static_cast<Scalar>(out.num_iterations()));
  }
  report.total = static_cast<double>(result.total.value()(0, 0));
  return result;
}

/// A trained planner: config, shared cluster set and f32 parameters.
struct TrainedModel
{
  TrainConfig config;
  IntentionRow clusters;
  std::unique_ptr<model::PlannerModel<float>> model;
};

TrainedModel make_model(const TrainConfig & config, IntentionRow clusters);

std::vector<nn::TensorRecord> model_records(const TrainedModel & trained);
void save_model(const TrainedModel & trained, const std::string & path);
TrainedModel load_model(const std::string & path);

struct EpochRecord
{
  int epoch = 0;
  int steps = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double learning_rate = 0.0;
};

struct TrainOptions
{
  /// Written every `checkpoint_every` epochs and at the last epoch; the best
  /// validation epoch also goes to `<path>.best`. Empty disables both.
  std::string checkpoint_path;
  int checkpoint_every = 1;
  std::string log_path;
  std::function<void(const EpochRecord &)> on_epoch;
};

struct TrainResult
{
  TrainedModel trained;
  std::vector<double> step_losses;
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_val_loss = 0.0;
};

/// Learning rate for `epoch` under the configured schedule.
double scheduled_learning_rate(const TrainConfig & config, int epoch);

/// Seeded shuffled mini-batch AdamW training. Throws Error("training") on an
/// empty dataset or a non-finite loss.
TrainResult train(const std::vector<Scenario> & dataset, const TrainConfig & config, const TrainOptions & options = {});

/// Every *.json scenario in `dir`, sorted by file name.
std::vector<Scenario> load_dataset(const std::string & dir);

struct EvalRow
{
  std::string scenario_id;
  double plan_ade = 0.0;
  double plan_fde = 0.0;
  /// NaN when no surrounding agent has a valid future.
  double pred_minade6 = 0.0;
  double pred_minfde6 = 0.0;
  std::vector<double> plan_ade_per_iteration;
};

struct EvalReport
{
  std::vector<EvalRow> rows;
  /// Means over rows, skipping NaN entries.
  EvalRow mean;
};

EvalRow evaluate_scene(const TrainedModel & trained, const Scenario & scenario);

/// Iteration-K inference on every scenario. Rows keep dataset order for any
/// `jobs` value.
EvalReport evaluate(const TrainedModel & trained, const std::vector<Scenario> & dataset, int jobs = 1);

/// `scenario_id,plan_ade,plan_fde,pred_minade6,pred_minfde6` plus a final
/// "mean" row.
std::string eval_csv(const EvalReport & report);

}  // namespace int2plan
