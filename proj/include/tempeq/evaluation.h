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

// Downstream evaluation of frozen representations: linear probes for the
// conversion windows, the propagate-and-average variant, and diagnostics of
// the displacement map.

#ifndef TEMPEQ_EVALUATION_H_
#define TEMPEQ_EVALUATION_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "tempeq/models.h"
#include "tempeq/synthdata.h"
#include "tempeq/trainer.h"

namespace tempeq {

// One row per evaluated visit. Post-conversion visits are never included.
struct EmbeddingTable {
  std::vector<std::int64_t> patient_ids;
  std::vector<int> months;
  std::map<int, std::vector<char>> labels;  // window -> 0/1 per row
  Tensor2 reps;

  std::size_t size() const { return patient_ids.size(); }
  EmbeddingTable select(std::span<const std::size_t> rows) const;
  bool operator==(const EmbeddingTable&) const = default;
};

// Encodes the un-augmented observation of every pre-conversion visit of the
// split's patients. Throws DataError for an empty split.
EmbeddingTable extract_representations(const EncoderParams& encoder, const Dataset& dataset,
                                       Split split);

// Columns: patient_id, t, label_<w>..., r0..r{d-1}.
void write_embeddings_csv(const EmbeddingTable& table, const std::filesystem::path& path);

struct ProbeConfig {
  int epochs = 50;
  double lr = 1e-4;
  std::size_t batch_size = 32;
  std::uint64_t seed = 5;
  // z-score features with the training rows' mean and std before the probe.
  bool standardize = true;
  // Weight positives by n_neg / n_pos in the cross-entropy.
  bool class_weighted = false;
  double threshold = 0.5;
  int folds = 4;

  void validate() const;
};

struct ProbeParams {
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<double> feature_mean;   // empty when not standardized
  std::vector<double> feature_scale;  // empty when not standardized

  bool operator==(const ProbeParams&) const = default;
};

// Logistic regression on frozen representations, minibatch Adam on binary
// cross-entropy. Throws DataError if the training labels are single-class.
ProbeParams train_linear_probe(const EmbeddingTable& table, int window, const ProbeConfig& cfg);

// Logistic probabilities.
std::vector<double> probe_scores(const ProbeParams& probe, const Tensor2& reps);

struct ProbeMetrics {
  double auroc = 0.0;
  double prauc = 0.0;
  double bacc = 0.0;
};

struct WindowResult {
  std::vector<ProbeMetrics> folds;
  ProbeMetrics mean;
  ProbeMetrics std;
};

// Patient-level k-fold split of `pool`, stratified by whether a patient has
// any positive label in the window. Fold f trains on the other folds and is
// scored on `test`.
WindowResult cross_validated_probe(const EmbeddingTable& pool, const EmbeddingTable& test,
                                   int window, const ProbeConfig& cfg);

using ArmMetrics = std::map<int, WindowResult>;  // window -> result

ArmMetrics evaluate_table(const EmbeddingTable& pool, const EmbeddingTable& test,
                          const ProbeConfig& cfg);

// Each representation replaced by (r + h(r, months / 12)) / 2.
EmbeddingTable tc_syn_table(const EmbeddingTable& table, const PredictorParams& predictor,
                            int months = 6);
// As above; throws ConfigError unless the checkpoint's arm trains a
// displacement map.
EmbeddingTable tc_syn_table(const EmbeddingTable& table, const Checkpoint& checkpoint,
                            int months = 6);

struct DiagnosticsConfig {
  std::vector<int> months = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  // Step in normalized time for the sensitivity finite difference.
  double fd_delta = 1e-3;
  // Month-0 visits of at most this many patients (lowest ids first).
  std::size_t max_patients = 40;
  // Composition diagnostic compares h(h(r, a), a) with h(r, 2a).
  int composition_months = 3;

  void validate() const;
};

struct CollapseStats {
  double mean_dm_norm = 0.0;
  double min_dm_norm = 0.0;
  double max_dm_norm = 0.0;
  // mean ||h(r, dt + delta) - h(r, dt)|| / delta over patients and months
  double sensitivity = 0.0;
};

struct DistanceRow {
  int dt_months = 0;
  double mean_distance = 0.0;  // mean ||h(r_0, dt) - r_0||
  double std_distance = 0.0;
};

struct Diagnostics {
  CollapseStats collapse;
  std::vector<DistanceRow> distances;
  // Spearman correlation between dt and mean distance.
  double distance_rank_correlation = 0.0;
  // mean ||h(h(r, a), a) - h(r, 2a)||; reported, not enforced.
  double composition_gap = 0.0;
};

Diagnostics equivariance_diagnostics(const EncoderParams& encoder,
                                     const PredictorParams& predictor, const Dataset& dataset,
                                     std::span<const std::int64_t> patient_ids,
                                     const DiagnosticsConfig& cfg);

// Header: dt_months,mean_distance,std_distance
void write_distance_table(const Diagnostics& diag, const std::filesystem::path& path);

}  // namespace tempeq

#endif  // TEMPEQ_EVALUATION_H_
