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

// Multi-layer perceptrons with an explicit forward trace and exact
// reverse-mode gradients.

#ifndef TEMPEQ_MLP_H_
#define TEMPEQ_MLP_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tempeq/tensor.h"

namespace tempeq {

enum class Activation { kRelu, kIdentity };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

struct Layer {
  Tensor2 weight;  // out x in
  std::vector<double> bias;
  Activation activation = Activation::kIdentity;

  std::size_t fan_in() const { return weight.cols(); }
  std::size_t fan_out() const { return weight.rows(); }
  bool operator==(const Layer&) const = default;
};

struct MlpParams {
  std::vector<Layer> layers;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;
  bool operator==(const MlpParams&) const = default;
};

// Partial derivatives of a scalar loss; one entry per parameter of the
// MlpParams it was created from.
struct GradStore {
  struct LayerGrad {
    Tensor2 weight;
    std::vector<double> bias;
    bool operator==(const LayerGrad&) const = default;
  };
  std::vector<LayerGrad> layers;

  static GradStore zeros_like(const MlpParams& params);
  void set_zero();
  // this += scale * other
  void add(const GradStore& other, double scale = 1.0);
  bool operator==(const GradStore&) const = default;
};

// Named view over one contiguous parameter block (a weight matrix or a bias).
struct ParamBlock {
  std::string name;
  std::span<double> values;
  bool is_bias = false;
};
std::vector<ParamBlock> param_blocks(MlpParams& params);
std::vector<ParamBlock> grad_blocks(GradStore& grads);

// Values retained by the forward pass for the backward pass.
struct MlpTrace {
  std::vector<Tensor2> layer_inputs;     // input of layer l
  std::vector<Tensor2> pre_activations;  // W_l a_l + b_l
};

struct MlpForward {
  Tensor2 output;
  MlpTrace trace;
};

struct MlpBackward {
  GradStore grads;
  Tensor2 input_grad;
};

// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero. `activations`
// has one tag per layer and the last must be identity.
MlpParams init_mlp(std::span<const std::size_t> dims,
                   std::span<const Activation> activations, std::uint64_t seed);

// Convenience: relu on every hidden layer, identity on the last.
MlpParams init_mlp(std::span<const std::size_t> dims, std::uint64_t seed);

MlpForward mlp_apply(const MlpParams& params, const Tensor2& input);

// Output only; skips keeping the trace.
Tensor2 mlp_eval(const MlpParams& params, const Tensor2& input);

// Gradients of <upstream, output> w.r.t. every parameter and the input.
MlpBackward mlp_backward(const MlpParams& params, const MlpTrace& trace,
                         const Tensor2& upstream);

// Sets every weight and bias of the last layer to zero.
void zero_last_layer(MlpParams& params);

}  // namespace tempeq

#endif  // TEMPEQ_MLP_H_
