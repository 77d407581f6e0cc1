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

#include "int2plan/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "int2plan/logging.hpp"
#include "int2plan/metrics.hpp"
#include "int2plan/nn/optim.hpp"

namespace int2plan {

namespace {

constexpr const char * kModule = "training";
constexpr const char * kConfigRecord = "meta.config";
constexpr const char * kClusterRecord = "meta.clusters";

IntentionRow empty_row(int n)
{
  return IntentionRow(static_cast<std::size_t>(n));
}

}  // namespace

PreparedScene prepare_scene(const Scenario & scenario, const ModelConfig & cfg, const IntentionRow & clusters)
{
  PreparedScene out;
  out.scene = scenario.frame == Frame::kEgo ? scenario : normalize_to_ego_frame(scenario);
  out.scene = crop_map(out.scene, cfg.map_range);
  out.tensors = tensorize(out.scene, cfg.tensorize_options());
  const auto & t = out.tensors;
  const int n_q = cfg.num_intentions;
  const bool need_clusters = cfg.ego_intentions == EgoIntentionMode::kCluster || t.agent_mask.tail(t.agent_mask.size() - 1).any();
  if (need_clusters && static_cast<int>(clusters.size()) != n_q) {
    throw Error("intention", "cluster set has " + std::to_string(clusters.size()) + " centers, expected " + std::to_string(n_q));
  }
  for (int a = 0; a < t.num_agent_slots; ++a) {
    if (!t.agent_mask(a)) {
      out.intentions.rows.push_back(empty_row(n_q));
    } else if (a == 0 && cfg.ego_intentions == EgoIntentionMode::kRoute) {
      out.intentions.rows.push_back(sample_route_intentions(out.scene.routes, cfg.route_interval, n_q));
    } else {
      out.intentions.rows.push_back(
        place_intentions(clusters, Vec2(t.agent_pose(a, 0), t.agent_pose(a, 1)), t.agent_pose(a, 2)));
    }
  }
  return out;
}

IntentionRow compute_clusters(const std::vector<Scenario> & dataset, int num_intentions, std::uint64_t seed)
{
  std::vector<Vec2> endpoints;
  for (const auto & s : dataset) {
    if (auto e = agent_centric_endpoint(s.ego, s.future_of(s.ego.id))) endpoints.push_back(*e);
    for (const auto & a : s.agents) {
      if (auto e = agent_centric_endpoint(a, s.future_of(a.id))) endpoints.push_back(*e);
    }
  }
  if (endpoints.empty()) throw Error("intention", "no valid GT endpoints to cluster");
  return cluster_intentions(endpoints, num_intentions, seed).centers;
}

TrainedModel make_model(const TrainConfig & config, IntentionRow clusters)
{
  config.validate();
  TrainedModel t;
  t.config = config;
  t.clusters = std::move(clusters);
  t.model = std::make_unique<model::PlannerModel<float>>(config.model, config.seed);
  return t;
}

std::vector<nn::TensorRecord> model_records(const TrainedModel & trained)
{
  auto records = nn::store_to_records(trained.model->parameters());
  records.push_back(nn::text_record(kConfigRecord, train_config_to_json(trained.config)));
  nn::TensorRecord c{kClusterRecord, {trained.clusters.size(), 3}, {}};
  for (const auto & p : trained.clusters) {
    c.data.push_back(static_cast<float>(p.position.x()));
    c.data.push_back(static_cast<float>(p.position.y()));
    c.data.push_back(p.valid ? 1.0f : 0.0f);
  }
  records.push_back(std::move(c));
  return records;
}

void save_model(const TrainedModel & trained, const std::string & path)
{
  nn::write_checkpoint_file(path, model_records(trained));
}

TrainedModel load_model(const std::string & path)
{
  const auto records = nn::read_checkpoint_file(path);
  const auto * cfg = nn::find_record(records, kConfigRecord);
  const auto * clusters = nn::find_record(records, kClusterRecord);
  if (cfg == nullptr || clusters == nullptr) throw Error(kModule, "checkpoint lacks model metadata: " + path);
  IntentionRow row;
  for (std::size_t i = 0; i + 2 < clusters->data.size(); i += 3) {
    IntentionPoint p;
    p.position = Vec2(clusters->data[i], clusters->data[i + 1]);
    p.valid = clusters->data[i + 2] != 0.0f;
    row.push_back(p);
  }
  auto trained = make_model(train_config_from_json(nn::record_text(*cfg)), std::move(row));
  try {
    nn::load_store(trained.model->parameters(), records);
  } catch (const Error & e) {
    throw Error(kModule, std::string("incompatible checkpoint: ") + e.what());
  }
  return trained;
}

double scheduled_learning_rate(const TrainConfig & config, int epoch)
{
  if (config.lr_schedule == "constant") return config.learning_rate;
  if (config.lr_schedule == "cosine") {
    const double progress = config.epochs > 1 ? static_cast<double>(epoch) / (config.epochs - 1) : 0.0;
    return 0.5 * config.learning_rate * (1.0 + std::cos(M_PI * progress));
  }
  if (config.lr_schedule == "step") {
    return config.learning_rate * std::pow(0.5, epoch / std::max(1, config.lr_step_epochs));
  }
  throw Error(kModule, "unknown lr_schedule '" + config.lr_schedule + "'");
}

namespace {

std::string one_line_config(const TrainConfig & config)
{
  return nlohmann::json::parse(train_config_to_json(config)).dump();
}

std::string ablation_line(const TrainConfig & c)
{
  std::ostringstream out;
  out << "# route_embedding=" << (c.model.use_route_embedding ? "on" : "off")
      << " ego_intentions=" << (c.model.ego_intentions == EgoIntentionMode::kRoute ? "route" : "cluster")
      << " prediction_loss=" << (c.prediction_loss ? "on" : "off")
      << " supervise_ego_prediction=" << (c.supervise_ego_prediction ? "on" : "off");
  return out.str();
}

double scene_loss_no_grad(const TrainedModel & trained, const PreparedScene & scene, const LossOptions & opts)
{
  nn::Graph<float> g(false);
  auto out = trained.model->forward(g, scene.tensors, scene.intentions);
  return compute_loss(out, scene.tensors, scene.intentions, opts).report.total;
}

}  // namespace

TrainResult train(const std::vector<Scenario> & dataset, const TrainConfig & config, const TrainOptions & options)
{
  if (dataset.empty()) throw Error(kModule, "empty dataset");
  config.validate();
  const auto & mcfg = config.model;

  std::size_t n_val = 0;
  if (config.val_fraction > 0.0 && dataset.size() > 1) {
    n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::floor(config.val_fraction * static_cast<double>(dataset.size()))), 1,
      dataset.size() - 1);
  }
  const std::vector<Scenario> train_set(dataset.begin(), dataset.end() - static_cast<std::ptrdiff_t>(n_val));
  const std::vector<Scenario> val_set(dataset.end() - static_cast<std::ptrdiff_t>(n_val), dataset.end());

  TrainResult result;
  result.trained = make_model(config, compute_clusters(train_set, mcfg.num_intentions, config.seed));
  auto & trained = result.trained;
  auto & store = trained.model->parameters();

  std::vector<PreparedScene> train_scenes, val_scenes;
  for (const auto & s : train_set) train_scenes.push_back(prepare_scene(s, mcfg, trained.clusters));
  for (const auto & s : val_set) val_scenes.push_back(prepare_scene(s, mcfg, trained.clusters));
  const LossOptions loss_opts{config.prediction_loss, config.supervise_ego_prediction};

  std::ofstream log;
  if (!options.log_path.empty()) {
    log.open(options.log_path);
    if (!log) throw Error(kModule, "cannot write metrics log " + options.log_path);
    log << "# config=" << one_line_config(config) << "\n" << ablation_line(config) << "\n";
    log << "epoch,steps,train_loss,val_loss,lr\n";
  }

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_scenes.size());
  std::iota(order.begin(), order.end(), 0);
  const auto batch = static_cast<std::size_t>(config.batch_size);
  result.best_val_loss = std::numeric_limits<double>::infinity();
  int steps = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    nn::AdamWConfig opt{scheduled_learning_rate(config, epoch), config.weight_decay, config.beta1, config.beta2, config.eps};
    double epoch_total = 0.0;
    for (std::size_t b0 = 0, b = 0; b0 < order.size(); b0 += batch, ++b) {
      const std::size_t b1 = std::min(order.size(), b0 + batch);
      const auto inv = 1.0f / static_cast<float>(b1 - b0);
      store.zero_grad();
      double batch_total = 0.0;
      for (std::size_t i = b0; i < b1; ++i) {
        const auto & scene = train_scenes[order[i]];
        try {
          nn::Graph<float> g;
          auto out = trained.model->forward(g, scene.tensors, scene.intentions);
          auto loss = compute_loss(out, scene.tensors, scene.intentions, loss_opts);
          if (!std::isfinite(loss.report.total)) throw Error(kModule, "non-finite loss");
          batch_total += loss.report.total;
          g.backward(nn::scale(loss.total, inv));
        } catch (const Error & e) {
          throw Error(
            kModule, "epoch " + std::to_string(epoch) + " batch " + std::to_string(b) + " scenario '" +
                       scene.scene.id + "': " + e.what());
        }
      }
      if (config.grad_clip > 0.0) nn::clip_grad_norm(store, config.grad_clip);
      nn::adamw_step(store, opt);
      ++steps;
      result.step_losses.push_back(batch_total / static_cast<double>(b1 - b0));
      epoch_total += batch_total;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.steps = steps;
    rec.train_loss = epoch_total / static_cast<double>(train_scenes.size());
    rec.learning_rate = opt.learning_rate;
    if (val_scenes.empty()) {
      rec.val_loss = rec.train_loss;
    } else {
      double total = 0.0;
      for (const auto & s : val_scenes) total += scene_loss_no_grad(trained, s, loss_opts);
      rec.val_loss = total / static_cast<double>(val_scenes.size());
    }
    result.epochs.push_back(rec);
    if (log) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%d,%d,%.9g,%.9g,%.9g\n", rec.epoch, rec.steps, rec.train_loss, rec.val_loss, rec.learning_rate);
      log << buf << std::flush;
    }
    logger()->info("epoch {} loss {:.6f} val {:.6f}", epoch, rec.train_loss, rec.val_loss);
    if (!options.checkpoint_path.empty()) {
      const bool last = epoch + 1 == config.epochs;
      if (last || (options.checkpoint_every > 0 && (epoch + 1) % options.checkpoint_every == 0)) {
        save_model(trained, options.checkpoint_path);
      }
      if (rec.val_loss < result.best_val_loss) save_model(trained, options.checkpoint_path + ".best");
    }
    if (rec.val_loss < result.best_val_loss) {
      result.best_val_loss = rec.val_loss;
      result.best_epoch = epoch;
    }
    if (options.on_epoch) options.on_epoch(rec);
  }
  return result;
}

std::vector<Scenario> load_dataset(const std::string & dir)
{
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(kModule, "dataset directory not found: " + dir);
  std::vector<fs::path> files;
  for (const auto & entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Scenario> out;
  for (const auto & f : files) out.push_back(load_scenario_file(f.string()));
  if (out.empty()) throw Error(kModule, "empty dataset: " + dir);
  return out;
}

namespace {

int best_mode(const Eigen::VectorXd & scores, const nn::Mask & valid)
{
  int best = -1;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (valid(i) && (best < 0 || scores(i) > scores(best))) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace

EvalRow evaluate_scene(const TrainedModel & trained, const Scenario & scenario)
{
  const auto & cfg = trained.config.model;
  const auto prep = prepare_scene(scenario, cfg, trained.clusters);
  const auto & t = prep.tensors;
  nn::Graph<float> g(false);
  const auto out = trained.model->forward(g, t, prep.intentions);
  const int t_f = t.future_len;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  EvalRow row;
  row.scenario_id = scenario.id;
  const Trajectory ego_gt = t.gt_future.block(0, 0, t_f, 2);
  const BoolArray ego_mask = t.gt_future_mask.segment(0, t_f);
  row.plan_ade = row.plan_fde = nan;
  for (int k = 0; k < out.num_iterations(); ++k) {
    if (!ego_mask.any()) {
      row.plan_ade_per_iteration.push_back(nan);
      continue;
    }
    const int m = best_mode(out.plan_scores(k), out.intention_masks[0]);
    const auto plan = out.plan(k, m);
    row.plan_ade_per_iteration.push_back(ade(plan, ego_gt, ego_mask));
    if (k + 1 == out.num_iterations()) {
      row.plan_ade = row.plan_ade_per_iteration.back();
      row.plan_fde = fde(plan, ego_gt, ego_mask);
    }
  }

  const int k_last = out.num_iterations() - 1;
  double sum_ade = 0.0, sum_fde = 0.0;
  int agents = 0;
  for (int a = 1; a < t.num_agent_slots; ++a) {
    const BoolArray mask = t.gt_future_mask.segment(a * t_f, t_f);
    if (!out.agent_decoded(a) || !mask.any()) continue;
    const Trajectory gt = t.gt_future.block(a * t_f, 0, t_f, 2);
    std::vector<Trajectory> modes;
    for (int m = 0; m < out.num_intentions; ++m) modes.push_back(out.prediction(k_last, a, m));
    const auto scores = out.prediction_scores(k_last, a);
    sum_ade += min_over_top_k(modes, scores, out.intention_masks[a], gt, mask, 6, DisplacementMetric::kAde);
    sum_fde += min_over_top_k(modes, scores, out.intention_masks[a], gt, mask, 6, DisplacementMetric::kFde);
    ++agents;
  }
  row.pred_minade6 = agents > 0 ? sum_ade / agents : nan;
  row.pred_minfde6 = agents > 0 ? sum_fde / agents : nan;
  return row;
}

EvalReport evaluate(const TrainedModel & trained, const std::vector<Scenario> & dataset, int jobs)
{
  EvalReport report;
  report.rows.resize(dataset.size());
  const int workers = std::clamp<int>(jobs, 1, std::max<int>(1, static_cast<int>(dataset.size())));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(dataset.size());
  auto work = [&] {
    for (std::size_t i = next++; i < dataset.size(); i = next++) {
      try {
        report.rows[i] = evaluate_scene(trained, dataset[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto & th : pool) th.join();
  }
  for (const auto & e : errors) {
    if (e) std::rethrow_exception(e);
  }

  auto mean_of = [&](auto field) {
    double total = 0.0;
    int n = 0;
    for (const auto & r : report.rows) {
      const double v = field(r);
      if (std::isnan(v)) continue;
      total += v;
      ++n;
    }
    return n > 0 ? total / n : std::numeric_limits<double>::quiet_NaN();
  };
  report.mean.scenario_id = "mean";
  report.mean.plan_ade = mean_of([](const EvalRow & r) { return r.plan_ade; });
  report.mean.plan_fde = mean_of([](const EvalRow & r) { return r.plan_fde; });
  report.mean.pred_minade6 = mean_of([](const EvalRow & r) { return r.pred_minade6; });
  report.mean.pred_minfde6 = mean_of([](const EvalRow & r) { return r.pred_minfde6; });
  const std::size_t k = dataset.empty() ? 0 : report.rows.front().plan_ade_per_iteration.size();
  for (std::size_t i = 0; i < k; ++i) {
    report.mean.plan_ade_per_iteration.push_back(mean_of([i](const EvalRow & r) { return r.plan_ade_per_iteration[i]; }));
  }
  return report;
}

std::string eval_csv(const EvalReport & report)
{
  std::ostringstream out;
  out << "scenario_id,plan_ade,plan_fde,pred_minade6,pred_minfde6\n";
  char buf[200];
  auto row = [&](const EvalRow & r) {
    std::snprintf(buf, sizeof(buf), ",%.6f,%.6f,%.6f,%.6f\n", r.plan_ade, r.plan_fde, r.pred_minade6, r.pred_minfde6);
    out << r.scenario_id << buf;
  };
  for (const auto & r : report.rows) row(r);
  row(report.mean);
  return out.str();
}

}  // namespace int2plan
