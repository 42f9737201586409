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

// Synthetic longitudinal cohort.
//
// Each patient has a static identity vector u and a latent severity s(t) that
// never decreases over the monthly visits t = 0..b. The observation at a
// visit mixes both signals through cohort-wide random matrices:
//
//   x_t = A u + c * B [s(t), s(t)^2, sin s(t)] + noise
//
// A patient converts at the first month its severity reaches the threshold.
// Visits before that month carry "converts within w months" labels; visits
// from that month on are flagged as already converted.

#ifndef TEMPEQ_SYNTHDATA_H_
#define TEMPEQ_SYNTHDATA_H_

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "tempeq/rng.h"
#include "tempeq/tensor.h"

namespace tempeq {

struct GeneratorConfig {
  std::size_t n_patients = 200;
  int horizon_months = 24;
  std::size_t obs_dim = 64;
  std::size_t identity_dim = 8;
  // Per-patient mean monthly severity increment ~ U(lo, hi).
  std::pair<double, double> progression_rate_range = {0.015, 0.05};
  // Severity at month 0 ~ U(lo, hi).
  std::pair<double, double> initial_severity_range = {0.0, 1.5};
  double conversion_threshold = 2.0;
  double signal_scale = 1.0;
  double noise_std = 0.05;
  std::vector<int> label_windows = {6, 12};
  // Patient-level split fractions; the test fraction is the remainder.
  double train_fraction = 0.6;
  double val_fraction = 0.2;
  std::uint64_t seed = 1;
  std::uint64_t split_seed = 7;

  void validate() const;
  bool operator==(const GeneratorConfig&) const = default;
};

struct Visit {
  std::int64_t patient_id = 0;
  int month = 0;
  std::vector<double> x;
  std::map<int, bool> converted_within;
  bool is_converted_already = false;
  double severity = 0.0;

  bool operator==(const Visit&) const = default;
};

struct PatientTrajectory {
  std::int64_t patient_id = 0;
  std::vector<double> identity;
  std::vector<double> severity;  // months 0..b
  double rate = 0.0;
  // First month with severity >= threshold, or -1.
  int conversion_month = -1;

  bool converter() const { return conversion_month >= 0; }
  bool operator==(const PatientTrajectory&) const = default;
};

struct Splits {
  std::vector<std::int64_t> train;
  std::vector<std::int64_t> val;
  std::vector<std::int64_t> test;

  bool operator==(const Splits&) const = default;
};

enum class Split { kTrain, kVal, kTest, kPool };  // pool = train + val

struct Dataset {
  GeneratorConfig config;
  Tensor2 mixing;  // A: obs_dim x identity_dim
  Tensor2 lift;    // B: obs_dim x 3
  std::vector<PatientTrajectory> patients;
  // Ordered by patient, then month; patient p owns rows
  // [p * (b + 1), (p + 1) * (b + 1)).
  std::vector<Visit> visits;
  Splits splits;

  int horizon() const { return config.horizon_months; }
  std::span<const Visit> patient_visits(std::size_t patient_index) const;
  std::vector<std::int64_t> patient_ids(Split split) const;
  std::size_t patient_index(std::int64_t patient_id) const;

  bool operator==(const Dataset&) const = default;
};

// s(0) = init, s(t+1) = s(t) + delta(t) with delta ~ Exp(mean = rate).
std::vector<double> severity_path(double rate, double init, int b, Rng& rng);
// Running sum of `increments` starting at `init`; increments must be >= 0.
std::vector<double> accumulate_severity(double init, std::span<const double> increments);

// [s, s^2, sin s]
std::vector<double> severity_features(double s);

// Conversion labels derived from a severity series: for each month t,
// converted_within[w] is true iff s(t) < threshold and the first crossing
// lies in (t, t + w] (truncated at the horizon).
std::vector<std::map<int, bool>> conversion_labels(std::span<const double> severity,
                                                   double threshold,
                                                   std::span<const int> windows);

Dataset generate_cohort(const GeneratorConfig& cfg);

struct AugmentConfig {
  double noise_std = 0.1;
  double mask_fraction = 0.1;
  std::pair<double, double> scale_range = {0.8, 1.2};

  void validate() const;
};

// Global scale ~ U(lo, hi), then each coordinate zeroed with probability
// mask_fraction, then additive N(0, noise_std^2) noise.
std::vector<double> augment_view(std::span<const double> x, const AugmentConfig& cfg, Rng& rng);

struct PairBatch {
  Tensor2 view_a;
  Tensor2 view_b;
  std::vector<int> month_a;
  std::vector<int> dt_months;
  std::vector<double> dt_norm;  // dt_months / 12
  std::vector<std::int64_t> patient_ids;

  std::size_t size() const { return patient_ids.size(); }
};

constexpr int kMaxPairGapMonths = 12;

// Draws training pairs from a fixed set of patients. A patient is eligible
// when it has two visits at most 12 months apart.
class PairSampler {
 public:
  PairSampler(const Dataset& dataset, std::span<const std::int64_t> patient_ids);

  std::size_t eligible_count() const { return eligible_.size(); }

  // min(batch_size, eligible) distinct patients; per patient a uniform
  // (t, dt) with dt in 1..12 and t + dt <= b, then one augmented view of
  // each visit.
  PairBatch sample(std::size_t batch_size, const AugmentConfig& aug, Rng& rng) const;

 private:
  const Dataset& dataset_;
  std::vector<std::size_t> eligible_;  // patient indices
};

}  // namespace tempeq

#endif  // TEMPEQ_SYNTHDATA_H_
