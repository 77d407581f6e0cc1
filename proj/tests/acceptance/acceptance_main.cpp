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


// Acceptance suite. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "int2plan/cli.hpp"
#include "int2plan/metrics.hpp"
#include "int2plan/planners.hpp"
#include "int2plan/postprocess.hpp"
#include "int2plan/simulator.hpp"
#include "int2plan/synthetic.hpp"
#include "int2plan/training.hpp"
#include "support/closed_loop.hpp"
#include "support/gradcheck.hpp"
#include "support/intention_oracles.hpp"
#include "support/op_suite.hpp"
#include "support/postprocess_cases.hpp"

namespace fs = std::filesystem;
using namespace int2plan;

namespace {

struct Outcome
{
  bool pass = false;
  std::string detail;
};

struct Criterion
{
  int number;
  const char * name;
  double time_limit_s;  // <= 0: no limit
  std::function<Outcome()> run;
};

std::string fmt(const char * f, double a, double b = 0, double c = 0, double d = 0)
{
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

std::string slurp(const fs::path & p)
{
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path work_dir()
{
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "int2plan_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// ---------------------------------------------------------------- 1

Outcome gradient_suite()
{
  double worst32 = 0.0, worst64 = 0.0;
  std::string where32, where64;
  auto note = [](double & worst, std::string & where, const std::string & name, const testing::GradCheckReport & r) {
    if (r.checked == 0 || r.max_error > worst) {
      worst = r.checked == 0 ? 1e30 : r.max_error;
      where = name + " " + r.worst;
    }
  };
  for (const auto & r : testing::op_gradcheck_suite<double>(1)) note(worst64, where64, r.name, r.report);
  for (const auto & r : testing::op_gradcheck_suite<float>(11)) note(worst32, where32, r.name, r.report);

  auto d = testing::make_end_to_end_case<double>(3);
  auto & store = d.model->parameters();
  std::vector<nn::Parameter<double> *> params;
  for (std::size_t i = 0; i < store.size(); ++i) params.push_back(&store[i]);
  note(worst64, where64, "end-to-end",
       testing::check_parameter_gradients<double>(params, [&](nn::Graph<double> & g) { return d.loss(g); }));

  auto f = testing::make_end_to_end_case<float>(3);
  auto shadow = testing::make_end_to_end_case<double>(3);
  note(worst32, where32, "end-to-end",
       testing::check_float_gradients_with_shadow(
         f.model->parameters(), [&](nn::Graph<float> & g) { return f.loss(g); }, shadow.model->parameters(),
         [&](nn::Graph<double> & g) { return shadow.loss(g); }));

  return {worst32 < 1e-3 && worst64 < 1e-4,
          fmt("max rel err f32 %.2e", worst32) + " (" + where32 + "), f64 " + fmt("%.2e", worst64) + " (" + where64 + ")"};
}

// ---------------------------------------------------------------- 2, 3

Outcome route_sampling()
{
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const auto why = testing::check_route_sampling_once(rng);
    if (!why.empty()) return {false, "instance " + std::to_string(i) + ": " + why};
  }
  return {true, "1000 randomized instances, 0 failures"};
}

Outcome positive_selection()
{
  std::mt19937_64 rng(77);
  int ties = 0;
  for (int i = 0; i < 10000; ++i) {
    bool tie = false;
    const auto why = testing::check_positive_selection_once(rng, &tie);
    if (!why.empty()) return {false, "instance " + std::to_string(i) + ": " + why};
    ties += tie;
  }
  return {ties > 0, "10000 instances, " + std::to_string(ties) + " with exact ties, 0 mismatches"};
}

// ---------------------------------------------------------------- 4, 5

TrainConfig overfit_config()
{
  auto c = profile_config("micro");
  c.epochs = 2000;
  c.lr_schedule = "cosine";
  c.learning_rate = 1.5e-3;
  c.grad_clip = 0.25;
  return c;
}

std::vector<Scenario> overfit_set()
{
  SyntheticOptions o;
  o.history_steps = 10;
  o.future_steps = 20;
  std::vector<Scenario> out;
  for (int i = 0; i < 10; ++i) out.push_back(gen_synthetic(SyntheticKind::kStraight, i, o));
  return out;
}

struct OverfitRun
{
  TrainResult result;
  EvalReport eval;
};

const OverfitRun & overfit_run()
{
  static const OverfitRun run = [] {
    OverfitRun r;
    const auto data = overfit_set();
    r.result = train(data, overfit_config());
    r.eval = evaluate(r.result.trained, data);
    return r;
  }();
  return run;
}

Outcome overfit()
{
  const auto & run = overfit_run();
  const auto & losses = run.result.step_losses;
  const double ade = run.eval.mean.plan_ade, fde = run.eval.mean.plan_fde;
  // 50-step moving average, checked for strict non-increase
  int increases = 0;
  double worst = 0.0;
  std::vector<double> ma;
  double sum = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    sum += losses[i];
    if (i >= 50) sum -= losses[i - 50];
    if (i >= 49) ma.push_back(sum / 50.0);
  }
  for (std::size_t i = 1; i < ma.size(); ++i) {
    if (ma[i] > ma[i - 1]) {
      ++increases;
      worst = std::max(worst, (ma[i] - ma[i - 1]) / ma[i - 1]);
    }
  }
  const bool steps_ok = losses.size() <= 2000;
  const bool pass = steps_ok && ade < 0.1 && fde < 0.3 && increases == 0;
  return {pass, fmt("%g steps, plan ADE %.4f m, FDE %.4f m, moving-average increases %g", double(losses.size()), ade,
                    fde, increases) +
                  fmt(" (largest %.2f%%), loss %.3f -> %.3f", 100.0 * worst, ma.empty() ? 0 : ma.front(),
                      ma.empty() ? 0 : ma.back())};
}

Outcome iteration_refinement()
{
  const auto & it = overfit_run().eval.mean.plan_ade_per_iteration;
  if (it.size() != 6) return {false, "expected 6 iterations, got " + std::to_string(it.size())};
  std::string all;
  for (double v : it) all += fmt(" %.4f", v);
  return {it.back() <= it.front(), "plan ADE per iteration:" + all};
}

// ---------------------------------------------------------------- 6

Outcome ablations()
{
  std::vector<Scenario> data;
  SyntheticOptions o;
  o.history_steps = 10;
  o.future_steps = 20;
  const SyntheticKind kinds[] = {SyntheticKind::kStraight, SyntheticKind::kStopBehindLead, SyntheticKind::kLaneChange,
                                 SyntheticKind::kUnprotectedLeft};
  for (int i = 0; i < 8; ++i) data.push_back(gen_synthetic(kinds[i % 4], 100 + i, o));

  struct Variant
  {
    const char * name;
    std::function<void(TrainConfig &)> apply;
    const char * logged;
  };
  const Variant variants[] = {
    {"route-embedding-off", [](TrainConfig & c) { c.model.use_route_embedding = false; }, "route_embedding=off"},
    {"cluster-intentions", [](TrainConfig & c) { c.model.ego_intentions = EgoIntentionMode::kCluster; },
     "ego_intentions=cluster"},
    {"prediction-off", [](TrainConfig & c) { c.prediction_loss = false; }, "prediction_loss=off"},
  };
  std::string detail;
  bool ok = true;
  for (const auto & v : variants) {
    auto cfg = profile_config("micro");
    cfg.epochs = 3;
    v.apply(cfg);
    TrainOptions opts;
    opts.log_path = (work_dir() / (std::string(v.name) + ".log.csv")).string();
    try {
      const auto r = train(data, cfg, opts);
      const auto e = evaluate(r.trained, data);
      const bool finite = std::isfinite(e.mean.plan_ade) && std::isfinite(r.epochs.back().train_loss);
      const bool logged = slurp(opts.log_path).find(v.logged) != std::string::npos;
      ok = ok && finite && logged;
      detail += std::string(v.name) + (finite && logged ? " ok" : " FAILED") + fmt(" (ADE %.2f); ", e.mean.plan_ade);
    } catch (const std::exception & ex) {
      ok = false;
      detail += std::string(v.name) + " threw: " + ex.what() + "; ";
    }
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- 7

Outcome closed_loop()
{
  std::string detail;
  bool ok = true;

  const auto log = testing::straight_log();
  SimulationConfig nr;
  nr.mode = SimulationMode::kNonReactive;
  const auto r1 = rollout_closed_loop(log, make_log_replay_planner(), nr);
  const double end_err = (r1.ego.back().position() - log.future_of(log.ego.id).back().position()).norm();
  ok = ok && !r1.aborted && end_err < 0.5;
  detail += fmt("log replay ends %.3f m from the log; ", end_err);

  const auto stopped = testing::stopped_ego_scene();
  SimulationConfig re;
  re.mode = SimulationMode::kReactive;
  const auto r2 = rollout_closed_loop(stopped, testing::standstill_planner(), re);
  const auto card2 = score_rollout(r2, stopped);
  const double gap = testing::longitudinal_gap(r2.ego.back(), r2.agents.front().states.back(), stopped.ego.footprint,
                                               stopped.agents.front().footprint);
  ok = ok && !r2.aborted && !card2.collision && gap >= re.idm.min_gap - 0.1;
  detail += fmt("reactive follower final gap %.3f m, collision %g; ", gap, card2.collision);

  // same scene without reactive agents: the logged car drives into the ego
  SimulationConfig crash;
  crash.mode = SimulationMode::kNonReactive;
  const auto r3 = rollout_closed_loop(stopped, testing::standstill_planner(), crash);
  const auto card3 = score_rollout(r3, stopped);
  ok = ok && card3.collision && card3.composite == 0.0;
  detail += fmt("colliding rollout composite %g", card3.composite);
  return {ok, detail};
}

// ---------------------------------------------------------------- 8

Outcome postprocess_suite()
{
  std::string detail;
  bool ok = true;
  const auto ref = build_reference_line(testing::straight_route());

  const auto plan = testing::cruise_plan(8.0, 50);
  const std::vector<AgentPrediction> clear{testing::parked_car(2, Vec2(20, 6), 50)};
  const auto fix = refine_trajectory(plan, ref, clear, Footprint{});
  double dev = 0.0;
  for (std::size_t i = 0; i < plan.size(); ++i) dev = std::max(dev, (fix.plan[i] - plan[i]).norm());
  ok = ok && dev <= 1e-9 && fix.plan.size() == plan.size();
  detail += fmt("fixpoint deviation %.1e; ", dev);

  testing::StopCase stop;
  const auto s = refine_trajectory(stop.plan, ref, stop.predictions, stop.ego);
  const double gap = testing::min_bumper_gap(s.plan, stop.ego, stop.predictions[0]);
  ok = ok && s.feasible && gap >= 1.0;
  detail += fmt("stop feasible %g, min gap %.3f m; ", s.feasible, gap);

  std::mt19937_64 rng(8);
  int violations = 0, conflicted = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = testing::cruise_plan(std::uniform_real_distribution<double>(5, 12)(rng), 50);
    const auto preds = testing::random_crossing(rng, p);
    const auto r = refine_trajectory(p, ref, preds, Footprint{});
    conflicted += !r.conflict_counts.empty() && r.conflict_counts.front() > 0;
    for (std::size_t i = 1; i < r.conflict_counts.size(); ++i) violations += r.conflict_counts[i] > r.conflict_counts[i - 1];
    const auto before = check_collisions(p, testing::chord_headings(p), Footprint{}, preds, 1.0).size();
    const auto after = check_collisions(r.plan, testing::chord_headings(r.plan), Footprint{}, preds, 1.0).size();
    violations += after > before;
  }
  ok = ok && violations == 0;
  detail += fmt("100 crossing scenes (%g with conflicts), %g monotonicity violations", conflicted, violations);
  return {ok, detail};
}

// ---------------------------------------------------------------- 9

Outcome determinism()
{
  const auto dir = work_dir() / "det";
  fs::create_directories(dir);
  auto cli = [](std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (code != 0) throw std::runtime_error("cli failed: " + err.str());
  };
  const auto p = [&](const std::string & n) { return (dir / n).string(); };
  std::ofstream(p("cfg.json")) << R"({"profile": "micro", "epochs": 5, "seed": 3})";
  cli({"--seed", "5", "gen-synthetic", "--kind", "all", "--count", "4", "--th", "10", "--tf", "20", "--out", p("data")});
  const auto scene = (dir / "data" / "lane-change-7.json").string();
  for (const char * tag : {"a", "b"}) {
    const std::string t(tag);
    cli({"--seed", "3", "--config", p("cfg.json"), "train", "--data", p("data"), "--out", p(t + ".ckpt"), "--log", p(t + ".log")});
    cli({"--config", p("cfg.json"), "eval", "--ckpt", p(t + ".ckpt"), "--data", p("data"), "--csv", p(t + ".csv")});
    cli({"simulate", "--scenario", scene, "--mode", "reactive", "--planner", "model", "--ckpt", p(t + ".ckpt"),
         "--postprocess", "on", "--horizon", "2", "--out", p(t + ".json")});
  }
  std::string detail;
  bool ok = true;
  for (const char * ext : {".ckpt", ".log", ".csv", ".json"}) {
    const auto a = slurp(p(std::string("a") + ext)), b = slurp(p(std::string("b") + ext));
    const bool same = !a.empty() && a == b;
    ok = ok && same;
    detail += std::string(ext + 1) + (same ? " identical" : " DIFFERS") + fmt(" (%g bytes); ", double(a.size()));
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- 10

bool bits_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

Outcome round_trips()
{
  std::string detail;
  bool ok = true;
  int scenes = 0;
  for (int k = 0; k < 4; ++k) {
    auto s = gen_synthetic(static_cast<SyntheticKind>(k), 40 + k);
    s.ego.states.back().x += 0.1 + 0.2;
    const auto text = save_scenario(s);
    const auto back = load_scenario(text);
    bool same = save_scenario(back) == text && back.agents.size() == s.agents.size();
    auto cmp_states = [&](const AgentHistory & a, const AgentHistory & b) {
      for (std::size_t i = 0; i < a.states.size(); ++i) {
        const auto & x = a.states[i];
        const auto & y = b.states[i];
        same = same && bits_equal(x.x, y.x) && bits_equal(x.y, y.y) && bits_equal(x.heading, y.heading) &&
               bits_equal(x.vx, y.vx) && bits_equal(x.vy, y.vy) && x.valid == y.valid;
      }
    };
    cmp_states(s.ego, back.ego);
    for (std::size_t a = 0; same && a < s.agents.size(); ++a) cmp_states(s.agents[a], back.agents[a]);
    for (const auto & [id, track] : s.gt_futures) {
      const auto & other = back.gt_futures.at(id);
      for (std::size_t i = 0; i < track.size(); ++i) same = same && bits_equal(track[i].x, other[i].x) && bits_equal(track[i].y, other[i].y);
    }
    for (std::size_t m = 0; m < s.map.size(); ++m) {
      for (std::size_t i = 0; i < s.map[m].points.size(); ++i) {
        same = same && bits_equal(s.map[m].points[i].x(), back.map[m].points[i].x()) &&
               bits_equal(s.map[m].points[i].y(), back.map[m].points[i].y());
      }
    }
    scenes += same;
  }
  ok = ok && scenes == 4;
  detail += fmt("scenario JSON %g/4 bit-exact; ", scenes);

  SyntheticOptions o;
  o.history_steps = 10;
  o.future_steps = 20;
  std::vector<Scenario> data;
  for (int i = 0; i < 3; ++i) data.push_back(gen_synthetic(SyntheticKind::kStraight, 60 + i, o));
  auto cfg = profile_config("micro");
  cfg.epochs = 3;
  const auto r = train(data, cfg);
  const auto path = (work_dir() / "rt.ckpt").string();
  save_model(r.trained, path);
  const auto back = load_model(path);
  const auto a = model_records(r.trained), b = model_records(back);
  bool same = a.size() == b.size();
  int moments = 0;
  for (std::size_t i = 0; same && i < a.size(); ++i) {
    same = a[i].name == b[i].name && a[i].dims == b[i].dims && a[i].data.size() == b[i].data.size() &&
           std::memcmp(a[i].data.data(), b[i].data.data(), a[i].data.size() * sizeof(float)) == 0;
    const auto & n = a[i].name;
    moments += n.size() > 3 && (n.ends_with(".m1") || n.ends_with(".m2"));
  }
  const auto path2 = (work_dir() / "rt2.ckpt").string();
  save_model(back, path2);
  same = same && slurp(path) == slurp(path2) && moments > 0 && back.model->parameters()[0].step == 3;
  ok = ok && same;
  detail += fmt("checkpoint %g tensors (%g optimizer moments) ", double(a.size()), moments) +
            (same ? "bit-exact" : "DIFFER");
  return {ok, detail};
}

}  // namespace

int main()
{
  const std::vector<Criterion> criteria = {
    {1, "gradient-checks", 60, gradient_suite},
    {2, "intention-sampling", 10, route_sampling},
    {3, "positive-selection", 5, positive_selection},
    {4, "overfit-convergence", 600, overfit},
    {5, "iteration-refinement", 0, iteration_refinement},
    {6, "ablation-switches", 0, ablations},
    {7, "closed-loop", 60, closed_loop},
    {8, "post-processing", 60, postprocess_suite},
    {9, "determinism", 0, determinism},
    {10, "format-round-trips", 0, round_trips},
  };
  int failures = 0;
  for (const auto & c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception & e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.time_limit_s <= 0 || secs < c.time_limit_s;
    if (!in_time) o.detail += fmt("; over the %.0f s limit", c.time_limit_s);
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s  %2d %-22s %7.1f s  %s\n", pass ? "PASS" : "FAIL", c.number, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  fs::remove_all(work_dir());
  return failures;
}
