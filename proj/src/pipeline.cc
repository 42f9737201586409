/*
 * Copyright 2026 The tempeq Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tempeq/pipeline.h"

#include <algorithm>
#include <cstdio>

#include "io_util.h"
#include "json.hpp"
#include "tempeq/dataset_io.h"
#include "tempeq/error.h"
#include "tempeq/losses.h"
#include "tempeq/rng.h"

namespace tempeq::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kTcSynKey = "tc_syn";

std::string echo(const ExperimentConfig& cfg) {
  return json{{"overrides", cfg.overrides}, {"config", to_json(cfg)}}.dump();
}

json metrics_to_json(const ProbeMetrics& m) {
  return {{"auroc", m.auroc}, {"prauc", m.prauc}, {"bacc", m.bacc}};
}

ProbeMetrics metrics_from_json(const json& j) {
  return {j.at("auroc").get<double>(), j.at("prauc").get<double>(), j.at("bacc").get<double>()};
}

json arm_metrics_to_json(const ArmMetrics& metrics) {
  json out = json::object();
  for (const auto& [window, result] : metrics) {
    json folds = json::array();
    for (const auto& f : result.folds) folds.push_back(metrics_to_json(f));
    json entry = metrics_to_json(result.mean);
    entry["fold_mean"] = metrics_to_json(result.mean);
    entry["fold_std"] = metrics_to_json(result.std);
    entry["folds"] = folds;
    out[std::to_string(window)] = entry;
  }
  return out;
}

json read_metrics(const ExperimentConfig& cfg) {
  const fs::path path = metrics_path(cfg);
  if (!fs::exists(path))
    throw IoError(path.string() + ": not found (run the probe command first)");
  json j = json::parse(io::read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("arms"))
    throw SchemaError(path.string() + ": not a metrics document");
  return j;
}

void write_json(const fs::path& path, const json& j) { io::write_file(path, j.dump(2) + "\n"); }

Dataset load_data(const ExperimentConfig& cfg) {
  const fs::path dir = data_dir(cfg);
  if (!fs::exists(dir / "manifest.json"))
    throw IoError(dir.string() + ": no dataset (run the gen-data command first)");
  return load_dataset(dir);
}

Checkpoint load_run(const ExperimentConfig& cfg, Arm arm) {
  const fs::path dir = run_dir(cfg, arm);
  if (!fs::exists(dir / "checkpoint.json"))
    throw IoError(dir.string() + ": no checkpoint (run the pretrain command first)");
  return load_checkpoint(dir);
}

Tensor2 random_matrix(std::size_t rows, std::size_t cols, Rng& rng,
                      std::span<const double> col_scale = {}) {
  Tensor2 t(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      t(i, j) = rng.normal(0.0, col_scale.empty() ? 1.0 : col_scale[j]);
  return t;
}

GradCheckEntry check_inputs(std::string name, const TensorLossFn& loss,
                            const TensorGradFn& grad, std::vector<Tensor2> inputs,
                            const GradCheckConfig& gc) {
  return {std::move(name), finite_diff_check_inputs(loss, grad, std::move(inputs), gc.step,
                                                    gc.tol)};
}

}  // namespace

fs::path data_dir(const ExperimentConfig& cfg) { return fs::path(cfg.output_dir) / "data"; }

fs::path run_dir(const ExperimentConfig& cfg, Arm arm) {
  return fs::path(cfg.output_dir) / "runs" / std::string(arm_name(arm));
}

fs::path metrics_path(const ExperimentConfig& cfg) {
  return fs::path(cfg.output_dir) / "metrics.json";
}

fs::path diagnostics_dir(const ExperimentConfig& cfg, Arm arm) {
  return fs::path(cfg.output_dir) / "diagnostics" / std::string(arm_name(arm));
}

std::vector<Arm> selected_arms(const ExperimentConfig& cfg, std::optional<Arm> only) {
  if (only) return {*only};
  return cfg.arms;
}

void gen_data(const ExperimentConfig& cfg) {
  save_dataset(generate_cohort(cfg.generator), data_dir(cfg), echo(cfg));
}

void pretrain(const ExperimentConfig& cfg, const std::vector<Arm>& arms) {
  const Dataset data = load_data(cfg);
  const auto pool = data.patient_ids(Split::kPool);
  for (Arm arm : arms) {
    TrainConfig tc = cfg.trainer;
    tc.arm = arm;
    const PretrainResult result = tempeq::pretrain(data, pool, tc, cfg.model, cfg.augment);
    const fs::path dir = run_dir(cfg, arm);
    save_checkpoint(result.checkpoint, dir, echo(cfg));
    write_training_log(result.log, dir / "train_log.csv");
  }
}

void probe(const ExperimentConfig& cfg, const std::vector<Arm>& arms) {
  const Dataset data = load_data(cfg);
  json arms_json = json::object();
  for (Arm arm : arms) {
    const Checkpoint ckpt = load_run(cfg, arm);
    const EmbeddingTable pool = extract_representations(ckpt.model.encoder, data, Split::kPool);
    const EmbeddingTable test = extract_representations(ckpt.model.encoder, data, Split::kTest);
    write_embeddings_csv(test, run_dir(cfg, arm) / "embeddings.csv");
    arms_json[std::string(arm_name(arm))] = arm_metrics_to_json(evaluate_table(pool, test, cfg.probe));
  }
  write_json(metrics_path(cfg), {{"arms", arms_json}, {"echo", json::parse(echo(cfg))}});
}

void tc_syn(const ExperimentConfig& cfg, Arm source) {
  if (!arm_has_displacement_map(source))
    throw ConfigError("tc-syn: arm '" + std::string(arm_name(source)) +
                      "' has no displacement-map predictor");
  json metrics = read_metrics(cfg);
  const Dataset data = load_data(cfg);
  const Checkpoint ckpt = load_run(cfg, source);
  const int months = cfg.eval.tc_syn_months;
  const EmbeddingTable pool = tc_syn_table(
      extract_representations(ckpt.model.encoder, data, Split::kPool), ckpt, months);
  const EmbeddingTable test = tc_syn_table(
      extract_representations(ckpt.model.encoder, data, Split::kTest), ckpt, months);
  metrics["arms"][std::string(kTcSynKey)] = arm_metrics_to_json(evaluate_table(pool, test, cfg.probe));
  metrics["tc_syn_source"] = arm_name(source);
  write_json(metrics_path(cfg), metrics);
}

Diagnostics diagnose(const ExperimentConfig& cfg, Arm arm) {
  if (!arm_has_displacement_map(arm))
    throw ConfigError("diagnose: arm '" + std::string(arm_name(arm)) +
                      "' has no displacement-map predictor");
  const Dataset data = load_data(cfg);
  const Checkpoint ckpt = load_run(cfg, arm);
  const auto ids = data.patient_ids(Split::kTest);
  const Diagnostics diag = equivariance_diagnostics(ckpt.model.encoder, ckpt.model.predictor,
                                                    data, ids, cfg.eval.diagnostics);
  json distances = json::array();
  for (const auto& row : diag.distances)
    distances.push_back({{"dt_months", row.dt_months},
                         {"mean_distance", row.mean_distance},
                         {"std_distance", row.std_distance}});
  const json out = {{"arm", arm_name(arm)},
                    {"patients", std::min(ids.size(), cfg.eval.diagnostics.max_patients)},
                    {"collapse",
                     {{"mean_dm_norm", diag.collapse.mean_dm_norm},
                      {"min_dm_norm", diag.collapse.min_dm_norm},
                      {"max_dm_norm", diag.collapse.max_dm_norm},
                      {"sensitivity", diag.collapse.sensitivity}}},
                    {"distances", distances},
                    {"distance_rank_correlation", diag.distance_rank_correlation},
                    {"composition_gap", diag.composition_gap}};
  const fs::path dir = diagnostics_dir(cfg, arm);
  write_json(dir / "diagnostics.json", out);
  if (fs::exists(metrics_path(cfg))) {
    json metrics = read_metrics(cfg);
    metrics["diagnostics"][std::string(arm_name(arm))] = out;
    write_json(metrics_path(cfg), metrics);
  }
  write_distance_table(diag, dir / "distance_table.csv");
  return diag;
}

std::vector<GradCheckEntry> grad_check(const ExperimentConfig& cfg) {
  const GradCheckConfig& gc = cfg.grad_check;
  const std::size_t n = gc.batch;
  const std::size_t w = gc.width;
  const VicregWeights vw = cfg.trainer.vicreg;
  Rng rng(gc.seed);

  // Per-column scales on both sides of 1 exercise both branches of the
  // variance hinge.
  std::vector<double> scales(w);
  for (auto& s : scales) s = rng.uniform(0.3, 1.6);
  const Tensor2 z = random_matrix(n, w, rng, scales);
  const Tensor2 zp = random_matrix(n, w, rng, scales);

  std::vector<GradCheckEntry> out;
  out.push_back(check_inputs(
      "invariance",
      [](std::span<const Tensor2> x) { return invariance_term(x[0], x[1]); },
      [](std::span<const Tensor2> x) {
        std::vector<Tensor2> g{Tensor2(x[0].rows(), x[0].cols()),
                               Tensor2(x[1].rows(), x[1].cols())};
        invariance_term_grad(x[0], x[1], 1.0, g[0], g[1]);
        return g;
      },
      {z, zp}, gc));
  out.push_back(check_inputs(
      "variance", [&](std::span<const Tensor2> x) { return variance_term(x[0], vw.eps); },
      [&](std::span<const Tensor2> x) {
        std::vector<Tensor2> g{Tensor2(x[0].rows(), x[0].cols())};
        variance_term_grad(x[0], vw.eps, 1.0, g[0]);
        return g;
      },
      {z}, gc));
  out.push_back(check_inputs(
      "covariance", [](std::span<const Tensor2> x) { return covariance_term(x[0]); },
      [](std::span<const Tensor2> x) {
        std::vector<Tensor2> g{Tensor2(x[0].rows(), x[0].cols())};
        covariance_term_grad(x[0], 1.0, g[0]);
        return g;
      },
      {z}, gc));
  out.push_back(check_inputs(
      "vicreg",
      [&](std::span<const Tensor2> x) { return vicreg_loss(x[0], x[1], vw).contrastive; },
      [&](std::span<const Tensor2> x) {
        std::vector<Tensor2> g{Tensor2(x[0].rows(), x[0].cols()),
                               Tensor2(x[1].rows(), x[1].cols())};
        vicreg_loss_grad(x[0], x[1], vw, 1.0, g[0], g[1]);
        return g;
      },
      {z, zp}, gc));
  out.push_back(check_inputs(
      "equivariance",
      [](std::span<const Tensor2> x) { return equivariance_loss(x[0], x[1]); },
      [](std::span<const Tensor2> x) {
        std::vector<Tensor2> g{Tensor2(x[0].rows(), x[0].cols()),
                               Tensor2(x[1].rows(), x[1].cols())};
        equivariance_loss_grad(x[0], x[1], 1.0, g[0], g[1]);
        return g;
      },
      {random_matrix(n, w, rng), random_matrix(n, w, rng)}, gc));
  out.push_back(check_inputs(
      "dm_regularization",
      [](std::span<const Tensor2> x) { return dm_regularization(x[0]); },
      [](std::span<const Tensor2> x) {
        std::vector<Tensor2> g{Tensor2(x[0].rows(), x[0].cols())};
        dm_regularization_grad(x[0], 1.0, g[0]);
        return g;
      },
      {random_matrix(n, w, rng)}, gc));

  // Full objective through all three networks, one audit per arm.
  const ModelDims dims{w, {w}, w, w, w};
  ModelParams model = init_model(dims, derive_seed(gc.seed, {1}));
  // A zero last layer would make the displacement exactly zero, where the
  // norm is not differentiable.
  auto& last = model.predictor.mlp.layers.back();
  const double bound = 1.0 / std::sqrt(static_cast<double>(last.fan_in()));
  for (double& v : last.weight.flat()) v = rng.uniform(-bound, bound);
  for (double& v : last.bias) v = rng.uniform(-bound, bound);
  const Tensor2 view_a = random_matrix(n, w, rng);
  const Tensor2 view_b = random_matrix(n, w, rng);
  std::vector<double> dt(n);
  for (auto& d : dt) d = static_cast<double>(rng.integer(1, kMaxPairGapMonths)) / kMaxPairGapMonths;

  for (Arm arm : {Arm::kTc, Arm::kTcNoDm, Arm::kTcNoReg, Arm::kVicregOnly}) {
    PackLossFn loss = [&](std::span<const MlpParams> p, std::vector<GradStore>* grads) {
      const ModelParams m{{p[0]}, {p[1]}, {p[2]}};
      ObjectiveResult r = tc_objective(m, view_a, view_b, dt, arm, vw, cfg.trainer.tc,
                                       grads != nullptr);
      if (grads != nullptr) *grads = {r.grads->encoder, r.grads->projector, r.grads->predictor};
      return r.breakdown.total;
    };
    out.push_back({"total_" + std::string(arm_name(arm)),
                   finite_diff_check(loss,
                                     {model.encoder.mlp, model.projector.mlp,
                                      model.predictor.mlp},
                                     gc.step, gc.tol)});
  }

  json doc = json::array();
  for (const auto& e : out)
    doc.push_back({{"loss", e.name},
                   {"pass", e.audit.pass},
                   {"max_rel_err", e.audit.max_rel_err},
                   {"checked", e.audit.checked},
                   {"worst_location", e.audit.worst_location}});
  write_json(fs::path(cfg.output_dir) / "grad_check.json",
             {{"step", gc.step}, {"tol", gc.tol}, {"audits", doc}});
  return out;
}

void report(const ExperimentConfig& cfg) {
  const json metrics = read_metrics(cfg);
  const json& arms = metrics.at("arms");
  std::vector<std::string> order;
  for (std::string_view known : {"vicreg_only", "tc", "tc_no_dm", "tc_no_reg", "tc_syn"})
    if (arms.contains(known)) order.emplace_back(known);
  for (const auto& [name, _] : arms.items())
    if (std::find(order.begin(), order.end(), name) == order.end()) order.push_back(name);

  std::string csv = "arm,window,auroc_mean,auroc_std,prauc_mean,prauc_std,bacc_mean,bacc_std\n";
  std::string txt = "arm          window  AUROC            PRAUC            BAcc\n";
  char buf[160];
  for (const auto& name : order) {
    std::vector<int> windows;
    for (const auto& [key, _] : arms.at(name).items()) windows.push_back(std::stoi(key));
    std::sort(windows.begin(), windows.end());
    for (int window : windows) {
      const json& entry = arms.at(name).at(std::to_string(window));
      const ProbeMetrics mean = metrics_from_json(entry.at("fold_mean"));
      const ProbeMetrics sd = metrics_from_json(entry.at("fold_std"));
      csv += name + "," + std::to_string(window);
      for (double v : {mean.auroc, sd.auroc, mean.prauc, sd.prauc, mean.bacc, sd.bacc})
        csv += "," + io::format_double(v);
      csv += "\n";
      std::snprintf(buf, sizeof(buf), "%-12s %6d  %.3f +/- %.3f  %.3f +/- %.3f  %.3f +/- %.3f\n",
                    name.c_str(), window, mean.auroc, sd.auroc, mean.prauc, sd.prauc, mean.bacc,
                    sd.bacc);
      txt += buf;
    }
  }
  io::write_file(fs::path(cfg.output_dir) / "report.csv", csv);
  io::write_file(fs::path(cfg.output_dir) / "report.txt", txt);
}

void run_all(const ExperimentConfig& cfg) {
  gen_data(cfg);
  pretrain(cfg, cfg.arms);
  probe(cfg, cfg.arms);
  if (std::find(cfg.arms.begin(), cfg.arms.end(), Arm::kTc) != cfg.arms.end()) {
    tc_syn(cfg, Arm::kTc);
    diagnose(cfg, Arm::kTc);
  }
  report(cfg);
}

}  // namespace tempeq::pipeline
