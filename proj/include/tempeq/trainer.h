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

#ifndef TEMPEQ_TRAINER_H_
#define TEMPEQ_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tempeq/losses.h"
#include "tempeq/models.h"
#include "tempeq/optim.h"
#include "tempeq/synthdata.h"

namespace tempeq {

// Pretraining variants.
//   kTc          full objective with the additive displacement map
//   kTcNoDm      predictor output used directly as the future representation;
//                no displacement regularizer
//   kTcNoReg     displacement map without the regularizer (upsilon = 0)
//   kVicregOnly  contrastive term alone (beta = 0)
enum class Arm { kTc, kTcNoDm, kTcNoReg, kVicregOnly };

std::string_view arm_name(Arm arm);
Arm parse_arm(std::string_view name);
// True for the arms whose predictor is a displacement map.
bool arm_has_displacement_map(Arm arm);
// Loss weights actually applied for an arm.
TcWeights effective_weights(Arm arm, const TcWeights& configured);

struct TrainConfig {
  int epochs = 300;
  std::size_t batch_size = 128;
  double base_lr = 5e-4;
  double weight_decay = 1e-6;
  int warmup_epochs = 10;
  Arm arm = Arm::kTc;
  VicregWeights vicreg;
  TcWeights tc;
  std::uint64_t seed = 3;

  void validate() const;
};

struct ModelGrads {
  GradStore encoder;
  GradStore projector;
  GradStore predictor;
};

struct ObjectiveResult {
  LossBreakdown breakdown;
  // Mean row norm of the displacement; for kTcNoDm the implied displacement
  // (prediction - r_t).
  double mean_dm_norm = 0.0;
  std::optional<ModelGrads> grads;
};

// Forward pass of the full objective on one batch of view pairs and, when
// requested, exact gradients for all three networks. `weights` are the
// configured weights; the arm decides which ones apply.
ObjectiveResult tc_objective(const ModelParams& model, const Tensor2& view_a,
                             const Tensor2& view_b, std::span<const double> dt_norm, Arm arm,
                             const VicregWeights& vicreg, const TcWeights& weights,
                             bool with_grads);

struct TrainingLogRow {
  std::uint64_t step = 0;
  double lr = 0.0;
  LossBreakdown loss;
  double mean_dm_norm = 0.0;

  bool operator==(const TrainingLogRow&) const = default;
};

struct TrainingLog {
  std::vector<TrainingLogRow> rows;
};

constexpr std::string_view kTrainingLogHeader =
    "step,lr,s_term,v_term,c_term,contrastive,equivariance,regularization,total,mean_dm_norm";

void write_training_log(const TrainingLog& log, const std::filesystem::path& path);
TrainingLog read_training_log(const std::filesystem::path& path);

struct Checkpoint {
  Arm arm = Arm::kTc;
  TrainConfig train;
  ModelDims dims;
  AugmentConfig augment;
  ModelParams model;
  // One slot per block of encoder, projector, predictor in that order.
  OptimizerState optimizer;
  // Completed optimizer steps; the per-step random stream is derived from
  // (train.seed, step), so this plus the seed is the full RNG state.
  std::uint64_t step = 0;
  std::uint64_t total_steps = 0;
  std::uint64_t warmup_steps = 0;
};

// FNV-1a 64 of the canonical JSON of (arm, train, dims, augment).
std::string config_hash(const Checkpoint& ckpt);

// Writes checkpoint.json and tensors.bin into `dir`. A non-empty
// `echo_json` (a JSON object) is stored verbatim under the manifest key
// "echo".
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir,
                     std::string_view echo_json = {});
Checkpoint load_checkpoint(const std::filesystem::path& dir);

// Every block of the model in optimizer-slot order.
std::vector<ParamBlock> model_blocks(ModelParams& model);
std::vector<ParamBlock> grad_blocks(ModelGrads& grads);

// Steps per epoch: floor(eligible / batch), at least 1.
std::uint64_t steps_per_epoch(std::size_t eligible_patients, std::size_t batch_size);

class Trainer {
 public:
  // Fresh run over `patient_ids` (the pretraining pool).
  Trainer(const Dataset& dataset, std::span<const std::int64_t> patient_ids,
          const TrainConfig& config, const ModelDims& dims, const AugmentConfig& augment);
  // Continues from a checkpoint written by a run with the same pool.
  Trainer(const Dataset& dataset, std::span<const std::int64_t> patient_ids,
          Checkpoint checkpoint);

  bool done() const { return state_.step >= state_.total_steps; }
  // Runs one optimizer step and returns its log row. Throws NumericalError
  // (with the step number) on a non-finite loss.
  const TrainingLogRow& step();
  // Runs until done() or `max_steps` more steps.
  void run(std::uint64_t max_steps = UINT64_MAX);

  const Checkpoint& checkpoint() const { return state_; }
  const TrainingLog& log() const { return log_; }

 private:
  const Dataset& dataset_;
  PairSampler sampler_;
  Checkpoint state_;
  TrainingLog log_;
};

struct PretrainResult {
  Checkpoint checkpoint;
  TrainingLog log;
};

PretrainResult pretrain(const Dataset& dataset, std::span<const std::int64_t> patient_ids,
                        const TrainConfig& config, const ModelDims& dims,
                        const AugmentConfig& augment);

}  // namespace tempeq

#endif  // TEMPEQ_TRAINER_H_
