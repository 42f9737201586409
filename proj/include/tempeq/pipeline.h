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

// Experiment commands behind the CLI. Every artifact lives under
// config.output_dir:
//
//   data/                       manifest.json, visits.jsonl, splits.json
//   runs/<arm>/                 checkpoint.json, tensors.bin, train_log.csv,
//                               embeddings.csv (test split)
//   metrics.json                probe results per arm and window
//   diagnostics/<arm>/          diagnostics.json, distance_table.csv
//   grad_check.json
//   report.csv, report.txt

#ifndef TEMPEQ_PIPELINE_H_
#define TEMPEQ_PIPELINE_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tempeq/config.h"
#include "tempeq/gradcheck.h"

namespace tempeq::pipeline {

std::filesystem::path data_dir(const ExperimentConfig& cfg);
std::filesystem::path run_dir(const ExperimentConfig& cfg, Arm arm);
std::filesystem::path metrics_path(const ExperimentConfig& cfg);
std::filesystem::path diagnostics_dir(const ExperimentConfig& cfg, Arm arm);

// Arms to act on: the single `only` arm when given, otherwise cfg.arms.
std::vector<Arm> selected_arms(const ExperimentConfig& cfg, std::optional<Arm> only);

void gen_data(const ExperimentConfig& cfg);
void pretrain(const ExperimentConfig& cfg, const std::vector<Arm>& arms);
// Rewrites metrics.json with one entry per probed arm.
void probe(const ExperimentConfig& cfg, const std::vector<Arm>& arms);
// Adds the "tc_syn" entry to metrics.json from the `source` arm's
// checkpoint. Throws ConfigError for arms without a displacement map.
void tc_syn(const ExperimentConfig& cfg, Arm source);
Diagnostics diagnose(const ExperimentConfig& cfg, Arm arm);

struct GradCheckEntry {
  std::string name;
  GradAudit audit;
};
// Finite-difference audit of every loss term and of the full objective of
// each arm on toy dimensions. Also writes grad_check.json.
std::vector<GradCheckEntry> grad_check(const ExperimentConfig& cfg);

// report.csv (one row per arm x window) and report.txt from metrics.json.
void report(const ExperimentConfig& cfg);

// gen-data, pretrain, probe, tc-syn and diagnose (when tc is among the arms),
// then report.
void run_all(const ExperimentConfig& cfg);

}  // namespace tempeq::pipeline

#endif  // TEMPEQ_PIPELINE_H_
