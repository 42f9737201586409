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

#include "tempeq/synthdata.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tempeq/error.h"

namespace tempeq {
namespace {

constexpr std::uint64_t kCohortStream = 11;
constexpr std::uint64_t kPatientStream = 12;
constexpr std::uint64_t kSplitStream = 13;

std::int64_t signed_index(std::size_t i) { return static_cast<std::int64_t>(i); }

}  // namespace

void GeneratorConfig::validate() const {
  if (n_patients == 0) throw ConfigError("generator.n_patients must be >= 1");
  if (horizon_months < 2) throw ConfigError("generator.horizon_months must be >= 2");
  if (obs_dim == 0 || identity_dim == 0)
    throw ConfigError("generator.obs_dim and generator.identity_dim must be >= 1");
  if (!(progression_rate_range.first > 0.0) ||
      progression_rate_range.first > progression_rate_range.second)
    throw ConfigError("generator.progression_rate_range must satisfy 0 < lo <= hi");
  if (initial_severity_range.first > initial_severity_range.second)
    throw ConfigError("generator.initial_severity_range must satisfy lo <= hi");
  if (!(noise_std >= 0.0)) throw ConfigError("generator.noise_std must be >= 0");
  if (!std::isfinite(conversion_threshold) || !std::isfinite(signal_scale))
    throw ConfigError("generator.conversion_threshold and signal_scale must be finite");
  if (label_windows.empty()) throw ConfigError("generator.label_windows must not be empty");
  for (int w : label_windows)
    if (w < 1) throw ConfigError("generator.label_windows entries must be >= 1");
  if (!(train_fraction > 0.0 && val_fraction >= 0.0 && train_fraction + val_fraction < 1.0))
    throw ConfigError("generator split fractions must satisfy train > 0, train + val < 1");
}

std::span<const Visit> Dataset::patient_visits(std::size_t patient_index) const {
  const std::size_t per = static_cast<std::size_t>(horizon()) + 1;
  return std::span<const Visit>(visits).subspan(patient_index * per, per);
}

std::vector<std::int64_t> Dataset::patient_ids(Split split) const {
  switch (split) {
    case Split::kTrain:
      return splits.train;
    case Split::kVal:
      return splits.val;
    case Split::kTest:
      return splits.test;
    case Split::kPool: {
      std::vector<std::int64_t> ids = splits.train;
      ids.insert(ids.end(), splits.val.begin(), splits.val.end());
      std::sort(ids.begin(), ids.end());
      return ids;
    }
  }
  return {};
}

std::size_t Dataset::patient_index(std::int64_t patient_id) const {
  if (patient_id < 0 || static_cast<std::size_t>(patient_id) >= patients.size() ||
      patients[static_cast<std::size_t>(patient_id)].patient_id != patient_id)
    throw DataError("unknown patient id " + std::to_string(patient_id));
  return static_cast<std::size_t>(patient_id);
}

std::vector<double> accumulate_severity(double init, std::span<const double> increments) {
  std::vector<double> s;
  s.reserve(increments.size() + 1);
  s.push_back(init);
  for (double d : increments) {
    if (!(d >= 0.0)) throw DomainError("severity increments must be >= 0");
    s.push_back(s.back() + d);
  }
  return s;
}

std::vector<double> severity_path(double rate, double init, int b, Rng& rng) {
  if (!(rate > 0.0)) throw DomainError("severity_path: rate must be > 0");
  if (b < 1) throw DomainError("severity_path: horizon must be >= 1");
  std::vector<double> increments(static_cast<std::size_t>(b));
  for (double& d : increments) d = rng.exponential(rate);
  return accumulate_severity(init, increments);
}

std::vector<double> severity_features(double s) { return {s, s * s, std::sin(s)}; }

std::vector<std::map<int, bool>> conversion_labels(std::span<const double> severity,
                                                   double threshold,
                                                   std::span<const int> windows) {
  const int b = static_cast<int>(severity.size()) - 1;
  int first = -1;
  for (int t = 0; t <= b; ++t) {
    if (severity[static_cast<std::size_t>(t)] >= threshold) {
      first = t;
      break;
    }
  }
  std::vector<std::map<int, bool>> labels(severity.size());
  for (int t = 0; t <= b; ++t) {
    const bool pre = first < 0 || t < first;
    for (int w : windows) labels[static_cast<std::size_t>(t)][w] = pre && first > t && first <= t + w;
  }
  return labels;
}

Dataset generate_cohort(const GeneratorConfig& cfg) {
  cfg.validate();
  Dataset ds;
  ds.config = cfg;
  const std::size_t obs = cfg.obs_dim;
  const std::size_t k = cfg.identity_dim;
  const int b = cfg.horizon_months;
  const std::size_t per = static_cast<std::size_t>(b) + 1;

  Rng cohort_rng(derive_seed(cfg.seed, {kCohortStream}));
  ds.mixing = Tensor2(obs, k);
  for (double& v : ds.mixing.flat()) v = cohort_rng.normal(0.0, 1.0 / std::sqrt(double(k)));
  ds.lift = Tensor2(obs, 3);
  for (double& v : ds.lift.flat()) v = cohort_rng.normal(0.0, 1.0 / std::sqrt(3.0));

  ds.patients.resize(cfg.n_patients);
  ds.visits.resize(cfg.n_patients * per);

  const std::int64_t n = signed_index(cfg.n_patients);
#pragma omp parallel for schedule(static)
  for (std::int64_t pid = 0; pid < n; ++pid) {
    Rng rng(derive_seed(cfg.seed, {kPatientStream, static_cast<std::uint64_t>(pid)}));
    PatientTrajectory& p = ds.patients[static_cast<std::size_t>(pid)];
    p.patient_id = pid;
    p.identity.resize(k);
    for (double& u : p.identity) u = rng.normal(0.0, 1.0);
    const double init =
        rng.uniform(cfg.initial_severity_range.first, cfg.initial_severity_range.second);
    p.rate = cfg.progression_rate_range.first == cfg.progression_rate_range.second
                 ? cfg.progression_rate_range.first
                 : rng.uniform(cfg.progression_rate_range.first,
                               cfg.progression_rate_range.second);
    p.severity = severity_path(p.rate, init, b, rng);
    const auto labels = conversion_labels(p.severity, cfg.conversion_threshold, cfg.label_windows);
    p.conversion_month = -1;
    for (int t = 0; t <= b; ++t) {
      if (p.severity[static_cast<std::size_t>(t)] >= cfg.conversion_threshold) {
        p.conversion_month = t;
        break;
      }
    }

    std::vector<double> base(obs, 0.0);
    for (std::size_t i = 0; i < obs; ++i) {
      auto a = ds.mixing.row(i);
      for (std::size_t j = 0; j < k; ++j) base[i] += a[j] * p.identity[j];
    }
    for (int t = 0; t <= b; ++t) {
      const double s = p.severity[static_cast<std::size_t>(t)];
      const auto phi = severity_features(s);
      Visit& v = ds.visits[static_cast<std::size_t>(pid) * per + static_cast<std::size_t>(t)];
      v.patient_id = pid;
      v.month = t;
      v.severity = s;
      v.converted_within = labels[static_cast<std::size_t>(t)];
      v.is_converted_already = p.conversion_month >= 0 && t >= p.conversion_month;
      v.x.resize(obs);
      for (std::size_t i = 0; i < obs; ++i) {
        auto lift = ds.lift.row(i);
        const double progression = lift[0] * phi[0] + lift[1] * phi[1] + lift[2] * phi[2];
        const double noise = cfg.noise_std > 0.0 ? rng.normal(0.0, cfg.noise_std) : 0.0;
        v.x[i] = base[i] + cfg.signal_scale * progression + noise;
      }
    }
  }

  // Patient-level split, stratified by converter status.
  Rng split_rng(derive_seed(cfg.split_seed, {kSplitStream}));
  std::vector<std::int64_t> groups[2];
  for (const auto& p : ds.patients) groups[p.converter() ? 1 : 0].push_back(p.patient_id);
  for (auto& group : groups) {
    std::shuffle(group.begin(), group.end(), split_rng.engine());
    const auto g = static_cast<double>(group.size());
    const auto n_train = static_cast<std::size_t>(std::llround(g * cfg.train_fraction));
    const auto n_val = std::min(group.size() - n_train,
                                static_cast<std::size_t>(std::llround(g * cfg.val_fraction)));
    for (std::size_t i = 0; i < group.size(); ++i) {
      auto& dst = i < n_train ? ds.splits.train
                  : i < n_train + n_val ? ds.splits.val
                                        : ds.splits.test;
      dst.push_back(group[i]);
    }
  }
  std::sort(ds.splits.train.begin(), ds.splits.train.end());
  std::sort(ds.splits.val.begin(), ds.splits.val.end());
  std::sort(ds.splits.test.begin(), ds.splits.test.end());
  return ds;
}

void AugmentConfig::validate() const {
  if (!(noise_std >= 0.0)) throw ConfigError("augment.noise_std must be >= 0");
  if (!(mask_fraction >= 0.0 && mask_fraction < 1.0))
    throw ConfigError("augment.mask_fraction must lie in [0, 1)");
  if (!(scale_range.first > 0.0 && scale_range.first <= scale_range.second))
    throw ConfigError("augment.scale_range must satisfy 0 < lo <= hi");
}

std::vector<double> augment_view(std::span<const double> x, const AugmentConfig& cfg,
                                 Rng& rng) {
  const double scale = cfg.scale_range.first == cfg.scale_range.second
                           ? cfg.scale_range.first
                           : rng.uniform(cfg.scale_range.first, cfg.scale_range.second);
  std::vector<double> view(x.begin(), x.end());
  for (double& v : view) v *= scale;
  if (cfg.mask_fraction > 0.0) {
    for (double& v : view)
      if (rng.bernoulli(cfg.mask_fraction)) v = 0.0;
  }
  if (cfg.noise_std > 0.0) {
    for (double& v : view) v += rng.normal(0.0, cfg.noise_std);
  }
  return view;
}

PairSampler::PairSampler(const Dataset& dataset, std::span<const std::int64_t> patient_ids)
    : dataset_(dataset) {
  // Monthly visits: any patient with at least two visits has a pair 1 month apart.
  if (dataset.horizon() >= 1) {
    for (std::int64_t id : patient_ids) eligible_.push_back(dataset.patient_index(id));
  }
  if (eligible_.empty()) throw DataError("pair sampler: no eligible patients");
}

PairBatch PairSampler::sample(std::size_t batch_size, const AugmentConfig& aug,
                              Rng& rng) const {
  if (batch_size == 0) throw ConfigError("pair sampler: batch size must be >= 1");
  const std::size_t count = std::min(batch_size, eligible_.size());
  const int b = dataset_.horizon();
  const std::size_t obs = dataset_.config.obs_dim;

  // Partial Fisher-Yates: the first `count` entries are a uniform subset.
  std::vector<std::size_t> order = eligible_;
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = static_cast<std::size_t>(
        rng.integer(static_cast<std::int64_t>(i), static_cast<std::int64_t>(order.size() - 1)));
    std::swap(order[i], order[j]);
  }

  PairBatch batch;
  batch.view_a = Tensor2(count, obs);
  batch.view_b = Tensor2(count, obs);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t p = order[i];
    int t = 0;
    int dt = 0;
    do {
      t = static_cast<int>(rng.integer(0, b - 1));
      dt = static_cast<int>(rng.integer(1, kMaxPairGapMonths));
    } while (t + dt > b);
    const auto visits = dataset_.patient_visits(p);
    const auto va = augment_view(visits[static_cast<std::size_t>(t)].x, aug, rng);
    const auto vb = augment_view(visits[static_cast<std::size_t>(t + dt)].x, aug, rng);
    std::copy(va.begin(), va.end(), batch.view_a.row(i).begin());
    std::copy(vb.begin(), vb.end(), batch.view_b.row(i).begin());
    batch.month_a.push_back(t);
    batch.dt_months.push_back(dt);
    batch.dt_norm.push_back(static_cast<double>(dt) / kMaxPairGapMonths);
    batch.patient_ids.push_back(dataset_.patients[p].patient_id);
  }
  return batch;
}

}  // namespace tempeq
