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

#include "int2plan/cli.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "int2plan/error.hpp"
#include "int2plan/intention.hpp"
#include "int2plan/logging.hpp"
#include "int2plan/metrics.hpp"
#include "int2plan/planners.hpp"
#include "int2plan/synthetic.hpp"
#include "int2plan/training.hpp"

namespace int2plan::cli {

namespace {

namespace fs = std::filesystem;

void write_file(const std::string & path, const std::string & content, const char * module)
{
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(module, "cannot write " + path);
  f << content;
}

Scenario load_for_simulation(const std::string & path)
{
  Scenario s = load_scenario_file(path);
  // An ego-frame file is a valid global frame as well.
  s.frame = Frame::kGlobal;
  return s;
}

/// Runs `fn(i)` for i in [0, n) on up to `jobs` threads; the first failure
/// (by index) is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn fn)
{
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::clamp<int>(jobs, 1, std::max<int>(1, static_cast<int>(n)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto & t : pool) t.join();
  }
  for (const auto & e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct PlannerChoice
{
  std::string planner = "model";
  std::string ckpt;
  bool postprocess = false;
};

Planner make_planner(const PlannerChoice & choice, int horizon_steps)
{
  if (choice.planner == "logreplay") return make_log_replay_planner();
  if (choice.planner == "idm") return make_idm_planner({}, horizon_steps);
  if (choice.planner == "model") {
    if (choice.ckpt.empty()) throw Error("simulator", "--ckpt is required for the model planner");
    if (!fs::exists(choice.ckpt)) throw Error("simulator", "checkpoint not found: " + choice.ckpt);
    std::shared_ptr<const TrainedModel> trained;
    try {
      trained = std::make_shared<TrainedModel>(load_model(choice.ckpt));
    } catch (const Error & e) {
      throw Error("simulator", std::string("cannot load checkpoint: ") + e.what());
    }
    return make_model_planner(trained);
  }
  throw Error("simulator", "unknown planner '" + choice.planner + "'");
}

std::vector<std::string> reversed(std::vector<std::string> v)
{
  std::reverse(v.begin(), v.end());
  return v;
}

}  // namespace

int run(const std::vector<std::string> & raw_args, std::ostream & out, std::ostream & err)
{
  std::vector<std::string> args = raw_args;
  if (args.size() >= 2 && args[0] == "metrics" && args[1] == "export") {
    args.erase(args.begin());
    args[0] = "metrics-export";
  }

  CLI::App app{"Intention-driven prediction and planning toolkit", "int2plan"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  app.add_option("--config", config_path, "Training/model config JSON")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Seed for every random choice");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  for (auto * opt : app.get_options()) opt->configurable(false);
  app.fallthrough();

  auto base_config = [&]() {
    TrainConfig c = config_path.empty() ? profile_config("private") : load_train_config(config_path);
    if (seed) c.seed = *seed;
    return c;
  };

  // train
  auto * train_cmd = app.add_subcommand("train", "Train a planner on a directory of scenarios");
  std::string data_dir, out_path, log_path;
  int checkpoint_every = 1;
  train_cmd->add_option("--data", data_dir, "Scenario directory")->required();
  train_cmd->add_option("--out", out_path, "Checkpoint path")->required();
  train_cmd->add_option("--log", log_path, "Metrics CSV (default: <out>.log.csv)");
  train_cmd->add_option("--checkpoint-every", checkpoint_every, "Epochs between checkpoints");

  // eval
  auto * eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string ckpt, csv_path;
  eval_cmd->add_option("--ckpt", ckpt, "Checkpoint")->required();
  eval_cmd->add_option("--data", data_dir, "Scenario directory")->required();
  eval_cmd->add_option("--csv", csv_path, "Output CSV")->required();

  // simulate
  auto * sim_cmd = app.add_subcommand("simulate", "Roll out one scenario");
  std::string scenario_path, mode_name = "nonreactive", postprocess = "off";
  PlannerChoice choice;
  double horizon = 15.0;
  sim_cmd->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  sim_cmd->add_option("--mode", mode_name, "open|nonreactive|reactive")
    ->check(CLI::IsMember({"open", "nonreactive", "reactive"}));
  sim_cmd->add_option("--planner", choice.planner, "model|idm|logreplay")
    ->check(CLI::IsMember({"model", "idm", "logreplay"}));
  sim_cmd->add_option("--ckpt", choice.ckpt, "Checkpoint for the model planner");
  sim_cmd->add_option("--out", out_path, "Rollout JSON")->required();
  sim_cmd->add_option("--postprocess", postprocess, "on|off")->check(CLI::IsMember({"on", "off"}));
  sim_cmd->add_option("--horizon", horizon, "Seconds")->check(CLI::PositiveNumber);

  // sample-intentions
  auto * sample_cmd = app.add_subcommand("sample-intentions", "Print route intention points as CSV");
  double dr = 4.0;
  int nq = 64;
  sample_cmd->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  sample_cmd->add_option("--dr", dr, "Sampling interval (m)")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--nq", nq, "Intention slots")->check(CLI::PositiveNumber);

  // cluster-intentions
  auto * cluster_cmd = app.add_subcommand("cluster-intentions", "K-means over endpoint CSV");
  std::string endpoints_path;
  cluster_cmd->add_option("--endpoints", endpoints_path, "CSV of x,y rows")->required()->check(CLI::ExistingFile);
  cluster_cmd->add_option("--nq", nq, "Cluster count")->check(CLI::PositiveNumber);

  // gen-synthetic
  auto * gen_cmd = app.add_subcommand("gen-synthetic", "Write procedural scenarios");
  std::string kind_name = "straight", profile;
  int count = 1;
  std::optional<int> th, tf;
  gen_cmd->add_option("--kind", kind_name, "straight|stop-behind-lead|lane-change|unprotected-left|all");
  gen_cmd->add_option("--count", count, "Scenarios to write")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--out", out_path, "Output directory")->required();
  gen_cmd->add_option("--profile", profile, "Take t_h/t_f from a profile");
  gen_cmd->add_option("--th", th, "History steps");
  gen_cmd->add_option("--tf", tf, "Future steps");

  // metrics export
  auto * metrics_cmd = app.add_subcommand("metrics-export", "Score rollouts over a directory as CSV");
  std::vector<std::string> modes{"open", "nonreactive", "reactive"};
  metrics_cmd->add_option("--data", data_dir, "Scenario directory")->required();
  metrics_cmd->add_option("--csv", csv_path, "Output CSV")->required();
  metrics_cmd->add_option("--modes", modes, "Subset of open,nonreactive,reactive")
    ->delimiter(',')
    ->check(CLI::IsMember({"open", "nonreactive", "reactive"}));
  metrics_cmd->add_option("--planner", choice.planner, "model|idm|logreplay")
    ->check(CLI::IsMember({"model", "idm", "logreplay"}));
  metrics_cmd->add_option("--ckpt", choice.ckpt, "Checkpoint for the model planner");
  metrics_cmd->add_option("--postprocess", postprocess, "on|off")->check(CLI::IsMember({"on", "off"}));
  metrics_cmd->add_option("--horizon", horizon, "Seconds")->check(CLI::PositiveNumber);

  try {
    auto rev = reversed(args);
    app.parse(rev);
  } catch (const CLI::ParseError & e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error[cli_io]: " << e.what() << "\n" << app.help();
    return 1;
  }

  try {
    if (train_cmd->parsed()) {
      auto cfg = base_config();
      TrainOptions opts;
      opts.checkpoint_path = out_path;
      opts.checkpoint_every = checkpoint_every;
      opts.log_path = log_path.empty() ? out_path + ".log.csv" : log_path;
      const auto dataset = load_dataset(data_dir);
      auto result = train(dataset, cfg, opts);
      out << "trained " << result.step_losses.size() << " steps, final loss " << result.epochs.back().train_loss
          << ", best epoch " << result.best_epoch << "\n";
    } else if (eval_cmd->parsed()) {
      if (!fs::exists(ckpt)) throw Error("training", "checkpoint not found: " + ckpt);
      const auto trained = load_model(ckpt);
      const auto report = evaluate(trained, load_dataset(data_dir), jobs);
      const auto csv = eval_csv(report);
      write_file(csv_path, csv, "training");
      out << csv.substr(csv.rfind('\n', csv.size() - 2) + 1);
    } else if (sim_cmd->parsed()) {
      const auto scenario = load_for_simulation(scenario_path);
      SimulationConfig sim;
      sim.mode = parse_simulation_mode(mode_name);
      sim.horizon_s = horizon;
      sim.postprocess = postprocess == "on";
      const auto planner = make_planner(choice, 0);
      const auto rollout = rollout_closed_loop(scenario, planner, sim);
      write_file(out_path, rollout_to_json(rollout), "simulator");
      const auto card = score_rollout(rollout, scenario);
      out << "steps " << rollout.steps() << " replans " << rollout.replans.size() << " composite " << card.composite
          << (rollout.aborted ? " (aborted)" : "") << "\n";
      if (rollout.aborted) throw Error("simulator", rollout.abort_reason);
    } else if (sample_cmd->parsed()) {
      auto scenario = load_scenario_file(scenario_path);
      if (scenario.frame == Frame::kGlobal) scenario = normalize_to_ego_frame(scenario);
      const auto row = sample_route_intentions(scenario.routes, dr, nq);
      out << "index,x,y,source,valid\n";
      char buf[128];
      for (std::size_t i = 0; i < row.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,", i, row[i].position.x(), row[i].position.y());
        out << buf << to_string(row[i].source) << ',' << (row[i].valid ? 1 : 0) << "\n";
      }
    } else if (cluster_cmd->parsed()) {
      std::ifstream f(endpoints_path);
      std::vector<Vec2> pts;
      std::string line;
      int line_no = 0;
      while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double x = 0.0, y = 0.0;
        if (!(ls >> x >> y)) {
          if (line_no == 1) continue;  // header
          throw Error("intention", endpoints_path + ":" + std::to_string(line_no) + ": expected x,y");
        }
        pts.emplace_back(x, y);
      }
      const auto result = cluster_intentions(pts, nq, seed.value_or(0));
      out << "index,x,y,valid\n";
      char buf[128];
      for (std::size_t i = 0; i < result.centers.size(); ++i) {
        const auto & c = result.centers[i];
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%d\n", i, c.position.x(), c.position.y(), c.valid ? 1 : 0);
        out << buf;
      }
    } else if (gen_cmd->parsed()) {
      SyntheticOptions opts;
      const TrainConfig cfg = profile.empty() ? base_config() : profile_config(profile);
      opts.history_steps = th.value_or(cfg.model.history_steps);
      opts.future_steps = tf.value_or(cfg.model.future_steps);
      std::vector<SyntheticKind> kinds;
      if (kind_name == "all") {
        kinds = {SyntheticKind::kStraight, SyntheticKind::kStopBehindLead, SyntheticKind::kLaneChange,
                 SyntheticKind::kUnprotectedLeft};
      } else {
        kinds = {parse_synthetic_kind(kind_name)};
      }
      fs::create_directories(out_path);
      const std::uint64_t base = seed.value_or(0);
      for (int i = 0; i < count; ++i) {
        const auto s = gen_synthetic(kinds[static_cast<std::size_t>(i) % kinds.size()], base + static_cast<std::uint64_t>(i), opts);
        const auto path = (fs::path(out_path) / (s.id + ".json")).string();
        save_scenario_file(s, path);
        out << path << "\n";
      }
    } else if (metrics_cmd->parsed()) {
      const auto dataset = load_dataset(data_dir);
      const auto planner = make_planner(choice, 0);
      std::vector<ScoreRow> rows(dataset.size() * modes.size());
      parallel_for(rows.size(), jobs, [&](std::size_t i) {
        auto scenario = dataset[i / modes.size()];
        scenario.frame = Frame::kGlobal;
        SimulationConfig sim;
        sim.mode = parse_simulation_mode(modes[i % modes.size()]);
        sim.horizon_s = horizon;
        sim.postprocess = postprocess == "on";
        const auto rollout = rollout_closed_loop(scenario, planner, sim);
        if (rollout.aborted) throw Error("simulator", scenario.id + ": " + rollout.abort_reason);
        rows[i] = {scenario.id, sim.mode, score_rollout(rollout, scenario)};
      });
      const auto csv = score_csv(rows);
      write_file(csv_path, csv, "metrics");
      out << csv.substr(csv.rfind('\n', csv.size() - 2) + 1);
    }
  } catch (const Error & e) {
    err << "error[" << e.module() << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception & e) {
    err << "error[cli_io]: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int run(int argc, char ** argv)
{
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace int2plan::cli
