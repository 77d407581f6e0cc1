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


#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "int2plan/error.hpp"
#include "int2plan/synthetic.hpp"
#include "int2plan/training.hpp"
#include "support/scenes.hpp"

namespace int2plan {
namespace {

using M = nn::Matrix<double>;
using model::MultiModalOutput;

constexpr int kTf = 5;

/// Two agent slots; agent 0 moves along +x, agent 1 along +y.
SceneTensors gt_tensors(bool agent1_valid = true)
{
  SceneTensors t;
  t.num_agent_slots = 2;
  t.future_len = kTf;
  t.gt_future = RowMatrixXd::Zero(2 * kTf, 2);
  t.gt_future_mask = BoolArray::Constant(2 * kTf, true);
  for (int s = 0; s < kTf; ++s) {
    t.gt_future(s, 0) = s + 1.0;
    t.gt_future(kTf + s, 1) = 2.0 * (s + 1);
  }
  if (!agent1_valid) t.gt_future_mask.segment(kTf, kTf).setConstant(false);
  return t;
}

IntentionSet intentions(int n_q)
{
  IntentionSet set;
  for (int a = 0; a < 2; ++a) {
    IntentionRow row;
    for (int i = 0; i < n_q; ++i) row.push_back({Vec2(i, a == 1 ? 10.0 : 0.0), IntentionSource::kCluster, true});
    set.rows.push_back(row);
  }
  return set;
}

M flat_gt(const SceneTensors & t, int a)
{
  M row(1, 2 * kTf);
  for (int s = 0; s < kTf; ++s) {
    row(0, 2 * s) = t.gt_future(a * kTf + s, 0);
    row(0, 2 * s + 1) = t.gt_future(a * kTf + s, 1);
  }
  return row;
}

/// Every mode is garbage except `pos`, which equals the GT; logits set by
/// `positive_logit` on pos and 0 elsewhere.
MultiModalOutput<double> fake_output(
  nn::Graph<double> & g, const SceneTensors & t, int n_q, int iterations, const std::vector<int> & pos,
  double positive_logit)
{
  MultiModalOutput<double> out;
  out.future_steps = kTf;
  out.num_intentions = n_q;
  out.agent_decoded = nn::Mask::Constant(2, true);
  out.intention_masks.assign(2, nn::Mask::Constant(n_q, true));
  for (int k = 0; k < iterations; ++k) {
    model::IterationOutput<double> it;
    for (int a = 0; a < 2; ++a) {
      M traj = M::Constant(n_q, 2 * kTf, 50.0);
      traj.row(pos[a]) = flat_gt(t, a);
      M logits = M::Zero(1, n_q);
      logits(0, pos[a]) = positive_logit;
      it.pred_trajectories.push_back(g.constant(traj));
      it.pred_logits.push_back(g.constant(logits));
      if (a == 0) {
        it.plan_trajectories = g.constant(traj);
        it.plan_logits = g.constant(logits);
      }
    }
    out.iterations.push_back(it);
  }
  return out;
}

TEST(Loss, PerfectFit)
{
  const auto t = gt_tensors();
  // agent 0 ends at (5, 0) -> slot 5; agent 1 ends at (0, 10) -> slot 0
  nn::Graph<double> g(false);
  const auto out = fake_output(g, t, 8, 2, {5, 0}, 30.0);
  const auto r = compute_loss(out, t, intentions(8), LossOptions{});
  EXPECT_EQ(r.report.positive[0], 5);
  EXPECT_EQ(r.report.positive[1], 0);
  EXPECT_EQ(r.report.plan_positive, 5);
  EXPECT_LT(r.report.total, 1e-6);
}

TEST(Loss, UniformConfidenceIsLogNq)
{
  const auto t = gt_tensors();
  nn::Graph<double> g(false);
  const auto out = fake_output(g, t, 64, 1, {5, 0}, 0.0);
  const auto r = compute_loss(out, t, intentions(64), LossOptions{});
  EXPECT_NEAR(r.report.pred_classification[0], std::log(64.0), 1e-12);
  EXPECT_NEAR(r.report.plan_classification[0], std::log(64.0), 1e-12);
  EXPECT_EQ(r.report.pred_regression[0], 0.0);
  EXPECT_EQ(r.report.plan_regression[0], 0.0);
  EXPECT_NEAR(r.report.total, 2.0 * std::log(64.0), 1e-12);
}

TEST(Loss, MeanOverIdenticalIterations)
{
  const auto t = gt_tensors();
  nn::Graph<double> g(false);
  // wrong positive so regression is non-zero too
  auto one = fake_output(g, t, 8, 1, {2, 3}, 1.5);
  auto two = fake_output(g, t, 8, 2, {2, 3}, 1.5);
  const auto a = compute_loss(one, t, intentions(8), LossOptions{});
  const auto b = compute_loss(two, t, intentions(8), LossOptions{});
  EXPECT_GT(a.report.total, 1.0);
  EXPECT_NEAR(a.report.total, b.report.total, 1e-12);
}

TEST(Loss, TotalIsSumOfComponents)
{
  const auto t = gt_tensors();
  nn::Graph<double> g(false);
  const auto out = fake_output(g, t, 8, 3, {2, 3}, 0.7);
  const auto r = compute_loss(out, t, intentions(8), LossOptions{}).report;
  double sum = 0;
  for (int k = 0; k < 3; ++k) {
    for (double v : {r.pred_regression[k], r.pred_classification[k], r.plan_regression[k], r.plan_classification[k]}) {
      EXPECT_GE(v, 0.0);
      sum += v;
    }
  }
  EXPECT_NEAR(r.total, sum / 3.0, 1e-12);
}

TEST(Loss, GradientOnlyThroughPositiveTrajectory)
{
  const auto t = gt_tensors();
  nn::ParameterStore<double> s;
  M traj = M::Constant(6, 2 * kTf, 1.0);
  auto & p = s.add("traj", {6, 2 * kTf}, traj);
  auto & l = s.add("logits", {1, 6}, M::Zero(1, 6));
  nn::Graph<double> g;
  MultiModalOutput<double> out;
  out.future_steps = kTf;
  out.num_intentions = 6;
  out.agent_decoded = nn::Mask::Constant(2, true);
  out.intention_masks.assign(2, nn::Mask::Constant(6, true));
  model::IterationOutput<double> it;
  it.pred_trajectories = {g.parameter(p), g.constant(traj)};
  it.pred_logits = {g.parameter(l), g.constant(M::Zero(1, 6))};
  it.plan_trajectories = g.constant(traj);
  it.plan_logits = g.constant(M::Zero(1, 6));
  out.iterations.push_back(it);
  auto r = compute_loss(out, t, intentions(6), LossOptions{});
  g.backward(r.total);
  const int pos = r.report.positive[0];
  ASSERT_EQ(pos, 5);
  for (int m = 0; m < 6; ++m) {
    if (m == pos) {
      EXPECT_GT(p.grad.row(m).norm(), 0.0);
    } else {
      EXPECT_EQ(p.grad.row(m).norm(), 0.0) << m;
    }
    EXPECT_NE(l.grad(0, m), 0.0) << m;
  }
}

TEST(Loss, AgentWithoutFutureIsSkipped)
{
  const auto t = gt_tensors(false);
  nn::Graph<double> g(false);
  const auto out = fake_output(g, t, 8, 1, {5, 0}, 30.0);
  const auto r = compute_loss(out, t, intentions(8), LossOptions{});
  EXPECT_EQ(r.report.positive[1], -1);
  EXPECT_LT(r.report.total, 1e-6);
}

TEST(Loss, SwitchesDropTerms)
{
  const auto t = gt_tensors();
  nn::Graph<double> g(false);
  const auto out = fake_output(g, t, 8, 1, {2, 3}, 0.0);
  const auto no_pred = compute_loss(out, t, intentions(8), LossOptions{false, true}).report;
  EXPECT_EQ(no_pred.pred_regression[0], 0.0);
  EXPECT_EQ(no_pred.positive[0], -1);
  EXPECT_GT(no_pred.plan_regression[0], 0.0);
  const auto no_ego = compute_loss(out, t, intentions(8), LossOptions{true, false}).report;
  EXPECT_EQ(no_ego.positive[0], -1);
  EXPECT_EQ(no_ego.positive[1], 0);
}

std::vector<Scenario> straight_set(int n)
{
  SyntheticOptions opts;
  opts.history_steps = 10;
  opts.future_steps = 20;
  std::vector<Scenario> out;
  for (int i = 0; i < n; ++i) out.push_back(gen_synthetic(SyntheticKind::kStraight, i, opts));
  return out;
}

TrainConfig micro(int epochs)
{
  auto c = profile_config("micro");
  c.epochs = epochs;
  c.batch_size = 10;
  return c;
}

TEST(Train, FirstEpochsDecrease)
{
  const auto r = train(straight_set(10), micro(5));
  ASSERT_EQ(r.epochs.size(), 5u);
  for (int e = 1; e < 5; ++e) EXPECT_LT(r.epochs[e].train_loss, r.epochs[e - 1].train_loss) << e;
}

TEST(Train, SameSeedSameCheckpoint)
{
  const auto data = straight_set(4);
  auto c = micro(3);
  c.batch_size = 2;
  const auto a = train(data, c);
  const auto b = train(data, c);
  EXPECT_EQ(model_records(a.trained), model_records(b.trained));
  EXPECT_EQ(a.step_losses, b.step_losses);
}

TEST(Train, ZeroLearningRateLeavesWeights)
{
  const auto data = straight_set(3);
  auto c = micro(4);
  c.learning_rate = 0.0;
  c.weight_decay = 0.0;
  c.batch_size = 1;
  const auto r = train(data, c);
  const auto fresh = make_model(c, r.trained.clusters);
  const auto & got = r.trained.model->parameters();
  const auto & want = fresh.model->parameters();
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i].value, want[i].value) << got[i].name;
}

TEST(Train, EmptyDatasetThrows)
{
  EXPECT_THROW(train({}, micro(1)), Error);
}

TEST(Train, LogRecordsConfigAndSwitches)
{
  const auto dir = std::filesystem::temp_directory_path() / "int2plan_train_log";
  std::filesystem::create_directories(dir);
  auto c = micro(2);
  c.prediction_loss = false;
  c.model.use_route_embedding = false;
  TrainOptions opts;
  opts.log_path = (dir / "log.csv").string();
  opts.checkpoint_path = (dir / "model.ckpt").string();
  train(straight_set(2), c, opts);
  std::ifstream in(opts.log_path);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  EXPECT_NE(text.find("prediction_loss=off"), std::string::npos);
  EXPECT_NE(text.find("route_embedding=off"), std::string::npos);
  EXPECT_NE(text.find("epoch,steps,train_loss,val_loss,lr"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(opts.checkpoint_path));
  const auto back = load_model(opts.checkpoint_path);
  EXPECT_FALSE(back.config.prediction_loss);
  EXPECT_FALSE(back.config.model.use_route_embedding);
  std::filesystem::remove_all(dir);
}

TEST(Schedule, Shapes)
{
  auto c = micro(11);
  c.learning_rate = 0.01;
  EXPECT_EQ(scheduled_learning_rate(c, 7), 0.01);
  c.lr_schedule = "cosine";
  EXPECT_DOUBLE_EQ(scheduled_learning_rate(c, 0), 0.01);
  EXPECT_NEAR(scheduled_learning_rate(c, 5), 0.005, 1e-15);
  EXPECT_NEAR(scheduled_learning_rate(c, 10), 0.0, 1e-15);
  c.lr_schedule = "step";
  c.lr_step_epochs = 3;
  EXPECT_DOUBLE_EQ(scheduled_learning_rate(c, 6), 0.0025);
  c.lr_schedule = "warmup";
  EXPECT_THROW(scheduled_learning_rate(c, 0), Error);
}

TEST(Config, JsonRoundTrip)
{
  auto c = profile_config("benchmark");
  c.seed = 77;
  c.model.ego_intentions = EgoIntentionMode::kCluster;
  c.model.route_interval = 2.5;
  const auto back = train_config_from_json(train_config_to_json(c));
  EXPECT_EQ(train_config_to_json(back), train_config_to_json(c));
  EXPECT_EQ(back.model.history_steps, 20);
  EXPECT_EQ(back.model.future_steps, 80);
}

TEST(Config, PrivateProfileDefaults)
{
  const auto c = profile_config("private");
  EXPECT_EQ(c.learning_rate, 1e-4);
  EXPECT_EQ(c.weight_decay, 0.01);
  EXPECT_EQ(c.model.num_intentions, 64);
  EXPECT_EQ(c.model.iterations, 6);
  EXPECT_EQ(c.model.route_interval, 4.0);
  EXPECT_EQ(c.model.history_steps, 15);
  EXPECT_EQ(c.model.future_steps, 50);
  EXPECT_THROW(profile_config("huge"), Error);
  EXPECT_THROW(train_config_from_json("{\"k\": 0}"), Error);
}

TEST(Eval, CsvHeaderAndDeterminism)
{
  const auto data = straight_set(3);
  const auto r = train(data, micro(1));
  const auto a = eval_csv(evaluate(r.trained, data));
  const auto b = eval_csv(evaluate(r.trained, data, 3));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')), "scenario_id,plan_ade,plan_fde,pred_minade6,pred_minfde6");
  EXPECT_NE(a.find("\nmean,"), std::string::npos);
}

TEST(Eval, MeansSkipMissingPredictions)
{
  auto data = straight_set(2);
  for (auto & s : data) {
    for (const auto & a : s.agents) s.gt_futures.erase(a.id);
    s.agents.clear();
  }
  const auto r = train(data, micro(1));
  const auto report = evaluate(r.trained, data);
  for (const auto & row : report.rows) EXPECT_TRUE(std::isnan(row.pred_minade6));
  EXPECT_TRUE(std::isnan(report.mean.pred_minade6));
  EXPECT_FALSE(std::isnan(report.mean.plan_ade));
}

TEST(Checkpoint, ModelRoundTripIncludesOptimizerState)
{
  const auto data = straight_set(2);
  const auto r = train(data, micro(2));
  const auto path = (std::filesystem::temp_directory_path() / "int2plan_rt.ckpt").string();
  save_model(r.trained, path);
  const auto back = load_model(path);
  EXPECT_EQ(model_records(back), model_records(r.trained));
  EXPECT_EQ(back.model->parameters()[0].step, 2);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace int2plan
