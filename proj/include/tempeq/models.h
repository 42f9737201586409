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

// The three networks of a time-equivariant contrastive model:
//
//   encoder    f: observation -> representation r
//   projector  g: r -> projection z (invariance is learned on z)
//   predictor  rho: [r, dt_norm] -> displacement map (equivariance is learned on r)
//
// The equivariance module moves a representation forward in time by adding
// the displacement: h(r, dt) = r + rho([r, dt]). The "no displacement map"
// ablation uses rho's output directly as the future representation.

#ifndef TEMPEQ_MODELS_H_
#define TEMPEQ_MODELS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "tempeq/mlp.h"
#include "tempeq/tensor.h"

namespace tempeq {

struct EncoderParams {
  MlpParams mlp;
  bool operator==(const EncoderParams&) const = default;
};

struct ProjectorParams {
  MlpParams mlp;
  bool operator==(const ProjectorParams&) const = default;
};

struct PredictorParams {
  MlpParams mlp;
  bool operator==(const PredictorParams&) const = default;
};

struct ModelDims {
  std::size_t obs_dim = 64;
  std::vector<std::size_t> encoder_hidden = {256};
  std::size_t rep_dim = 128;
  std::size_t proj_hidden = 256;  // also the projection width
  std::size_t pred_hidden = 128;
};

struct ModelParams {
  EncoderParams encoder;
  ProjectorParams projector;
  PredictorParams predictor;
  bool operator==(const ModelParams&) const = default;
};

// Validates dims (every width >= 1). The projector has exactly three layers
// and the predictor two; the predictor's last layer starts at zero so that
// h(r, dt) = r before training.
ModelParams init_model(const ModelDims& dims, std::uint64_t seed);

// Checks the structural invariants of a parameter set (projector depth,
// predictor input width rep_dim + 1, chaining). Throws ShapeError.
void validate_model(const ModelParams& model);

std::size_t rep_dim(const ModelParams& model);

Tensor2 encode(const EncoderParams& enc, const Tensor2& batch);
Tensor2 project(const ProjectorParams& proj, const Tensor2& reps);

// Row i of the result is [reps_i, dt_norm_i]. Throws DomainError when any
// dt_norm lies outside [0, 1] and ShapeError on a length mismatch.
Tensor2 predictor_input(const Tensor2& reps, std::span<const double> dt_norm);

Tensor2 predict_displacement(const PredictorParams& pred, const Tensor2& reps,
                             std::span<const double> dt_norm);

// reps + predict_displacement(pred, reps, dt_norm)
Tensor2 propagate(const PredictorParams& pred, const Tensor2& reps,
                  std::span<const double> dt_norm);

// rho([r, dt]) with no additive skip.
Tensor2 propagate_direct(const PredictorParams& pred, const Tensor2& reps,
                         std::span<const double> dt_norm);

}  // namespace tempeq

#endif  // TEMPEQ_MODELS_H_
