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

#include "tempeq/models.h"

#include <string>

#include "tempeq/error.h"
#include "tempeq/rng.h"

namespace tempeq {
namespace {

constexpr std::uint64_t kEncoderStream = 1;
constexpr std::uint64_t kProjectorStream = 2;
constexpr std::uint64_t kPredictorStream = 3;

}  // namespace

ModelParams init_model(const ModelDims& dims, std::uint64_t seed) {
  if (dims.obs_dim == 0 || dims.rep_dim == 0 || dims.proj_hidden == 0 || dims.pred_hidden == 0)
    throw ConfigError("model dims must be >= 1");

  std::vector<std::size_t> enc_dims{dims.obs_dim};
  enc_dims.insert(enc_dims.end(), dims.encoder_hidden.begin(), dims.encoder_hidden.end());
  enc_dims.push_back(dims.rep_dim);
  const std::vector<std::size_t> proj_dims{dims.rep_dim, dims.proj_hidden, dims.proj_hidden,
                                           dims.proj_hidden};
  const std::vector<std::size_t> pred_dims{dims.rep_dim + 1, dims.pred_hidden, dims.rep_dim};

  ModelParams model;
  model.encoder.mlp = init_mlp(enc_dims, derive_seed(seed, {kEncoderStream}));
  model.projector.mlp = init_mlp(proj_dims, derive_seed(seed, {kProjectorStream}));
  model.predictor.mlp = init_mlp(pred_dims, derive_seed(seed, {kPredictorStream}));
  zero_last_layer(model.predictor.mlp);
  return model;
}

void validate_model(const ModelParams& model) {
  const auto& enc = model.encoder.mlp;
  const auto& proj = model.projector.mlp;
  const auto& pred = model.predictor.mlp;
  if (enc.layers.empty() || proj.layers.size() != 3 || pred.layers.size() != 2)
    throw ShapeError("model: expected encoder >= 1, projector 3, predictor 2 layers");
  const std::size_t rep = enc.output_dim();
  if (proj.input_dim() != rep) throw ShapeError("model: projector input != rep_dim");
  if (pred.input_dim() != rep + 1) throw ShapeError("model: predictor input != rep_dim + 1");
  if (pred.output_dim() != rep) throw ShapeError("model: predictor output != rep_dim");
  for (const MlpParams* m : {&enc, &proj, &pred}) {
    for (std::size_t l = 1; l < m->layers.size(); ++l) {
      if (m->layers[l].fan_in() != m->layers[l - 1].fan_out())
        throw ShapeError("model: layers do not chain");
    }
  }
}

std::size_t rep_dim(const ModelParams& model) { return model.encoder.mlp.output_dim(); }

Tensor2 encode(const EncoderParams& enc, const Tensor2& batch) {
  return mlp_eval(enc.mlp, batch);
}

Tensor2 project(const ProjectorParams& proj, const Tensor2& reps) {
  return mlp_eval(proj.mlp, reps);
}

Tensor2 predictor_input(const Tensor2& reps, std::span<const double> dt_norm) {
  if (dt_norm.size() != reps.rows())
    throw ShapeError("predictor input: " + std::to_string(dt_norm.size()) + " dt values for " +
                     std::to_string(reps.rows()) + " rows");
  Tensor2 out(reps.rows(), reps.cols() + 1);
  for (std::size_t r = 0; r < reps.rows(); ++r) {
    const double dt = dt_norm[r];
    if (!(dt >= 0.0 && dt <= 1.0))
      throw DomainError("dt_norm " + std::to_string(dt) + " outside [0, 1] at row " +
                        std::to_string(r));
    auto src = reps.row(r);
    auto dst = out.row(r);
    std::copy(src.begin(), src.end(), dst.begin());
    dst[reps.cols()] = dt;
  }
  return out;
}

Tensor2 predict_displacement(const PredictorParams& pred, const Tensor2& reps,
                             std::span<const double> dt_norm) {
  return mlp_eval(pred.mlp, predictor_input(reps, dt_norm));
}

Tensor2 propagate(const PredictorParams& pred, const Tensor2& reps,
                  std::span<const double> dt_norm) {
  Tensor2 out = predict_displacement(pred, reps, dt_norm);
  require_same_shape(out, reps, "propagate");
  auto o = out.flat();
  auto r = reps.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += r[i];
  return out;
}

Tensor2 propagate_direct(const PredictorParams& pred, const Tensor2& reps,
                         std::span<const double> dt_norm) {
  Tensor2 out = predict_displacement(pred, reps, dt_norm);
  require_same_shape(out, reps, "propagate_direct");
  return out;
}

}  // namespace tempeq
