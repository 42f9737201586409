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

// Experiment configuration: one JSON document, validated before any work,
// with dotted-path overrides ("trainer.epochs=1"). Keys not present in the
// default document are rejected.

#ifndef TEMPEQ_CONFIG_H_
#define TEMPEQ_CONFIG_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tempeq/evaluation.h"
#include "tempeq/models.h"
#include "tempeq/synthdata.h"
#include "tempeq/trainer.h"

namespace tempeq {

struct EvalConfig {
  int tc_syn_months = 6;
  DiagnosticsConfig diagnostics;
};

struct GradCheckConfig {
  double step = 1e-5;
  double tol = 1e-4;
  std::size_t width = 8;  // every toy layer
  std::size_t batch = 6;
  std::uint64_t seed = 17;
};

struct ExperimentConfig {
  std::string output_dir = "out";
  std::vector<Arm> arms = {Arm::kVicregOnly, Arm::kTc, Arm::kTcNoDm, Arm::kTcNoReg};
  GeneratorConfig generator;
  AugmentConfig augment;
  ModelDims model;  // obs_dim mirrors generator.obs_dim
  TrainConfig trainer;
  ProbeConfig probe;
  EvalConfig eval;
  GradCheckConfig grad_check;
  // "key=value" strings applied on top of the file, kept for the manifests.
  std::vector<std::string> overrides;

  void validate() const;
};

nlohmann::json to_json(const GeneratorConfig& c);
nlohmann::json to_json(const AugmentConfig& c);
nlohmann::json to_json(const ModelDims& c);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const ProbeConfig& c);
nlohmann::json to_json(const ExperimentConfig& c);

// Strict parsers; unknown keys and wrong types throw ConfigError naming the
// dotted field path.
GeneratorConfig generator_config_from_json(const nlohmann::json& j);
AugmentConfig augment_config_from_json(const nlohmann::json& j);
ModelDims model_dims_from_json(const nlohmann::json& j, std::size_t obs_dim);
TrainConfig train_config_from_json(const nlohmann::json& j);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

// Applies one "dotted.key=value" override. The value is parsed as JSON when
// possible and as a plain string otherwise.
void apply_override(nlohmann::json& doc, std::string_view assignment);

// Reads the file (if non-empty path), applies overrides and validates.
ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                        const std::vector<std::string>& overrides);

}  // namespace tempeq

#endif  // TEMPEQ_CONFIG_H_
