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

#include "tempeq/evaluation.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "io_util.h"
#include "tempeq/error.h"
#include "tempeq/losses.h"
#include "tempeq/metrics.h"
#include "tempeq/optim.h"
#include "tempeq/rng.h"

namespace tempeq {
namespace {

constexpr std::uint64_t kFoldStream = 31;
constexpr std::uint64_t kProbeStream = 32;

double sigmoid(double x) { return ranknet_pair_probability(x); }

ProbeMetrics mean_of(const std::vector<ProbeMetrics>& v) {
  ProbeMetrics m;
  for (const auto& x : v) {
    m.auroc += x.auroc;
    m.prauc += x.prauc;
    m.bacc += x.bacc;
  }
  const double n = static_cast<double>(v.size());
  m.auroc /= n;
  m.prauc /= n;
  m.bacc /= n;
  return m;
}

// Sample standard deviation (n - 1); zero for a single fold.
ProbeMetrics std_of(const std::vector<ProbeMetrics>& v, const ProbeMetrics& mean) {
  ProbeMetrics s;
  if (v.size() < 2) return s;
  for (const auto& x : v) {
    s.auroc += (x.auroc - mean.auroc) * (x.auroc - mean.auroc);
    s.prauc += (x.prauc - mean.prauc) * (x.prauc - mean.prauc);
    s.bacc += (x.bacc - mean.bacc) * (x.bacc - mean.bacc);
  }
  const double n1 = static_cast<double>(v.size() - 1);
  s.auroc = std::sqrt(s.auroc / n1);
  s.prauc = std::sqrt(s.prauc / n1);
  s.bacc = std::sqrt(s.bacc / n1);
  return s;
}

const std::vector<char>& window_labels(const EmbeddingTable& table, int window) {
  auto it = table.labels.find(window);
  if (it == table.labels.end())
    throw ConfigError("no labels for window " + std::to_string(window));
  return it->second;
}

}  // namespace

EmbeddingTable EmbeddingTable::select(std::span<const std::size_t> rows) const {
  EmbeddingTable out;
  out.reps = Tensor2(rows.size(), reps.cols());
  for (const auto& [w, _] : labels) out.labels[w].reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    out.patient_ids.push_back(patient_ids.at(r));
    out.months.push_back(months.at(r));
    for (const auto& [w, l] : labels) out.labels[w].push_back(l.at(r));
    std::copy(reps.row(r).begin(), reps.row(r).end(), out.reps.row(i).begin());
  }
  return out;
}

EmbeddingTable extract_representations(const EncoderParams& encoder, const Dataset& dataset,
                                       Split split) {
  const auto ids = dataset.patient_ids(split);
  std::vector<const Visit*> visits;
  for (std::int64_t id : ids) {
    for (const Visit& v : dataset.patient_visits(dataset.patient_index(id)))
      if (!v.is_converted_already) visits.push_back(&v);
  }
  if (visits.empty()) throw DataError("extract_representations: empty split");

  Tensor2 obs(visits.size(), dataset.config.obs_dim);
  EmbeddingTable table;
  for (int w : dataset.config.label_windows) table.labels[w].reserve(visits.size());
  for (std::size_t i = 0; i < visits.size(); ++i) {
    const Visit& v = *visits[i];
    std::copy(v.x.begin(), v.x.end(), obs.row(i).begin());
    table.patient_ids.push_back(v.patient_id);
    table.months.push_back(v.month);
    for (int w : dataset.config.label_windows) {
      auto it = v.converted_within.find(w);
      table.labels[w].push_back(it != v.converted_within.end() && it->second ? 1 : 0);
    }
  }
  table.reps = encode(encoder, obs);
  return table;
}

void write_embeddings_csv(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::string out = "patient_id,t";
  for (const auto& [w, _] : table.labels) out += ",label_" + std::to_string(w);
  for (std::size_t j = 0; j < table.reps.cols(); ++j) out += ",r" + std::to_string(j);
  out += '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    out += std::to_string(table.patient_ids[i]) + "," + std::to_string(table.months[i]);
    for (const auto& [w, l] : table.labels) out += l[i] ? ",1" : ",0";
    for (double v : table.reps.row(i)) out += "," + io::format_double(v);
    out += '\n';
  }
  io::write_file(path, out);
}

void ProbeConfig::validate() const {
  if (epochs < 1) throw ConfigError("probe.epochs must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("probe.lr must be > 0");
  if (batch_size == 0) throw ConfigError("probe.batch_size must be >= 1");
  if (folds < 2) throw ConfigError("probe.folds must be >= 2");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("probe.threshold must lie in (0, 1)");
}

ProbeParams train_linear_probe(const EmbeddingTable& table, int window, const ProbeConfig& cfg) {
  cfg.validate();
  const auto& labels = window_labels(table, window);
  const std::size_t n = table.size();
  const std::size_t d = table.reps.cols();
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (positives == 0 || positives == n)
    throw DataError("train_linear_probe: degenerate labels for window " + std::to_string(window));

  ProbeParams probe;
  probe.weights.assign(d, 0.0);
  Tensor2 x = table.reps;
  if (cfg.standardize) {
    probe.feature_mean.assign(d, 0.0);
    probe.feature_scale.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) probe.feature_mean[j] += x(i, j);
    for (double& m : probe.feature_mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double c = x(i, j) - probe.feature_mean[j];
        probe.feature_scale[j] += c * c;
      }
    for (double& s : probe.feature_scale) {
      s = std::sqrt(s / static_cast<double>(n));
      if (!(s > 1e-12)) s = 1.0;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j)
        x(i, j) = (x(i, j) - probe.feature_mean[j]) / probe.feature_scale[j];
  }

  const double pos_weight =
      cfg.class_weighted ? static_cast<double>(n - positives) / static_cast<double>(positives)
                         : 1.0;

  std::vector<double> grad_w(d, 0.0);
  std::vector<double> grad_b(1, 0.0);
  std::vector<double> bias(1, 0.0);
  const std::vector<ParamBlock> params{{"weights", probe.weights, false},
                                       {"bias", bias, true}};
  const std::vector<ParamBlock> grads{{"weights", grad_w, false}, {"bias", grad_b, true}};
  OptimizerState opt = OptimizerState::for_blocks(params);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, {kProbeStream, static_cast<std::uint64_t>(epoch)}));
    std::shuffle(order.begin(), order.end(), rng.engine());
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      std::fill(grad_w.begin(), grad_w.end(), 0.0);
      grad_b[0] = 0.0;
      const double inv = 1.0 / static_cast<double>(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        auto row = x.row(i);
        double logit = bias[0];
        for (std::size_t j = 0; j < d; ++j) logit += probe.weights[j] * row[j];
        const double y = labels[i] ? 1.0 : 0.0;
        const double weight = labels[i] ? pos_weight : 1.0;
        const double g = weight * (sigmoid(logit) - y) * inv;
        for (std::size_t j = 0; j < d; ++j) grad_w[j] += g * row[j];
        grad_b[0] += g;
      }
      adamw_step(params, grads, opt, cfg.lr, 0.0);
    }
  }
  probe.bias = bias[0];
  return probe;
}

std::vector<double> probe_scores(const ProbeParams& probe, const Tensor2& reps) {
  if (reps.cols() != probe.weights.size()) throw ShapeError("probe_scores: feature width");
  const bool standardized = !probe.feature_mean.empty();
  std::vector<double> scores(reps.rows());
  for (std::size_t i = 0; i < reps.rows(); ++i) {
    auto row = reps.row(i);
    double logit = probe.bias;
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double v =
          standardized ? (row[j] - probe.feature_mean[j]) / probe.feature_scale[j] : row[j];
      logit += probe.weights[j] * v;
    }
    scores[i] = sigmoid(logit);
  }
  return scores;
}

WindowResult cross_validated_probe(const EmbeddingTable& pool, const EmbeddingTable& test,
                                   int window, const ProbeConfig& cfg) {
  cfg.validate();
  const auto& pool_labels = window_labels(pool, window);
  const auto& test_labels = window_labels(test, window);

  // Stratify patients by "has any positive visit".
  std::map<std::int64_t, bool> patient_positive;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto& flag = patient_positive[pool.patient_ids[i]];
    flag = flag || pool_labels[i] != 0;
  }
  std::vector<std::int64_t> groups[2];
  for (const auto& [id, pos] : patient_positive) groups[pos ? 1 : 0].push_back(id);
  Rng rng(derive_seed(cfg.seed, {kFoldStream, static_cast<std::uint64_t>(window)}));
  std::map<std::int64_t, int> fold_of;
  int next = 0;
  for (auto& group : groups) {
    std::shuffle(group.begin(), group.end(), rng.engine());
    for (std::int64_t id : group) fold_of[id] = next++ % cfg.folds;
  }

  WindowResult result;
  for (int f = 0; f < cfg.folds; ++f) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (fold_of[pool.patient_ids[i]] != f) rows.push_back(i);
    ProbeConfig fold_cfg = cfg;
    fold_cfg.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(window),
                                           static_cast<std::uint64_t>(f)});
    const ProbeParams probe = train_linear_probe(pool.select(rows), window, fold_cfg);
    const auto scores = probe_scores(probe, test.reps);
    result.folds.push_back({auroc(scores, test_labels), prauc(scores, test_labels),
                            balanced_accuracy(scores, test_labels, cfg.threshold)});
  }
  result.mean = mean_of(result.folds);
  result.std = std_of(result.folds, result.mean);
  return result;
}

ArmMetrics evaluate_table(const EmbeddingTable& pool, const EmbeddingTable& test,
                          const ProbeConfig& cfg) {
  ArmMetrics out;
  for (const auto& [w, _] : pool.labels) out[w] = cross_validated_probe(pool, test, w, cfg);
  return out;
}

EmbeddingTable tc_syn_table(const EmbeddingTable& table, const PredictorParams& predictor,
                            int months) {
  const std::vector<double> dt(table.size(), static_cast<double>(months) / kMaxPairGapMonths);
  const Tensor2 future = propagate(predictor, table.reps, dt);
  EmbeddingTable out = table;
  auto o = out.reps.flat();
  auto f = future.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = 0.5 * (o[i] + f[i]);
  return out;
}

EmbeddingTable tc_syn_table(const EmbeddingTable& table, const Checkpoint& checkpoint,
                            int months) {
  if (!arm_has_displacement_map(checkpoint.arm))
    throw ConfigError("tc_syn: arm '" + std::string(arm_name(checkpoint.arm)) +
                      "' has no displacement-map predictor");
  return tc_syn_table(table, checkpoint.model.predictor, months);
}

void DiagnosticsConfig::validate() const {
  if (months.empty()) throw ConfigError("eval.diag_months must not be empty");
  for (int m : months)
    if (m < 1 || m > kMaxPairGapMonths) throw ConfigError("eval.diag_months entries must be in 1..12");
  if (!(fd_delta > 0.0 && fd_delta < 0.5)) throw ConfigError("eval.fd_delta must be in (0, 0.5)");
  if (max_patients == 0) throw ConfigError("eval.diag_patients must be >= 1");
  if (composition_months < 1 || 2 * composition_months > kMaxPairGapMonths)
    throw ConfigError("eval.composition_months must be in 1..6");
}

Diagnostics equivariance_diagnostics(const EncoderParams& encoder,
                                     const PredictorParams& predictor, const Dataset& dataset,
                                     std::span<const std::int64_t> patient_ids,
                                     const DiagnosticsConfig& cfg) {
  cfg.validate();
  std::vector<std::int64_t> ids(patient_ids.begin(), patient_ids.end());
  std::sort(ids.begin(), ids.end());
  if (ids.size() > cfg.max_patients) ids.resize(cfg.max_patients);
  if (ids.empty()) throw DataError("equivariance_diagnostics: no patients");

  Tensor2 obs(ids.size(), dataset.config.obs_dim);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& x = dataset.patient_visits(dataset.patient_index(ids[i]))[0].x;
    std::copy(x.begin(), x.end(), obs.row(i).begin());
  }
  const Tensor2 r0 = encode(encoder, obs);
  const std::size_t n = ids.size();

  Diagnostics diag;
  double norm_sum = 0.0;
  double sens_sum = 0.0;
  double min_norm = INFINITY;
  double max_norm = 0.0;
  std::size_t count = 0;
  std::vector<double> dts;
  std::vector<double> means;
  for (int m : cfg.months) {
    const double dt = static_cast<double>(m) / kMaxPairGapMonths;
    const std::vector<double> dt_rows(n, dt);
    const Tensor2 dm = predict_displacement(predictor, r0, dt_rows);
    const Tensor2 moved = propagate(predictor, r0, dt_rows);
    const double dt2 = dt + cfg.fd_delta <= 1.0 ? dt + cfg.fd_delta : dt - cfg.fd_delta;
    const Tensor2 moved2 = propagate(predictor, r0, std::vector<double>(n, dt2));

    std::vector<double> distances(n);
    for (std::size_t i = 0; i < n; ++i) {
      double dist = 0.0;
      double diff = 0.0;
      for (std::size_t j = 0; j < r0.cols(); ++j) {
        const double a = moved(i, j) - r0(i, j);
        const double b = moved2(i, j) - moved(i, j);
        dist += a * a;
        diff += b * b;
      }
      distances[i] = std::sqrt(dist);
      sens_sum += std::sqrt(diff) / cfg.fd_delta;
    }
    for (double norm : row_norms(dm)) {
      norm_sum += norm;
      min_norm = std::min(min_norm, norm);
      max_norm = std::max(max_norm, norm);
      ++count;
    }
    const double mean = std::accumulate(distances.begin(), distances.end(), 0.0) /
                        static_cast<double>(n);
    double var = 0.0;
    for (double d : distances) var += (d - mean) * (d - mean);
    const double sd = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
    diag.distances.push_back({m, mean, sd});
    dts.push_back(static_cast<double>(m));
    means.push_back(mean);
  }
  diag.collapse.mean_dm_norm = norm_sum / static_cast<double>(count);
  diag.collapse.min_dm_norm = min_norm;
  diag.collapse.max_dm_norm = max_norm;
  diag.collapse.sensitivity = sens_sum / static_cast<double>(count);
  diag.distance_rank_correlation = dts.size() >= 2 ? spearman(dts, means) : 0.0;

  const double a = static_cast<double>(cfg.composition_months) / kMaxPairGapMonths;
  const Tensor2 once = propagate(predictor, r0, std::vector<double>(n, a));
  const Tensor2 twice = propagate(predictor, once, std::vector<double>(n, a));
  const Tensor2 direct = propagate(predictor, r0, std::vector<double>(n, 2.0 * a));
  double gap = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < r0.cols(); ++j) {
      const double d = twice(i, j) - direct(i, j);
      acc += d * d;
    }
    gap += std::sqrt(acc);
  }
  diag.composition_gap = gap / static_cast<double>(n);
  return diag;
}

void write_distance_table(const Diagnostics& diag, const std::filesystem::path& path) {
  std::string out = "dt_months,mean_distance,std_distance\n";
  for (const auto& row : diag.distances) {
    out += std::to_string(row.dt_months) + "," + io::format_double(row.mean_distance) + "," +
           io::format_double(row.std_distance) + "\n";
  }
  io::write_file(path, out);
}

}  // namespace tempeq
