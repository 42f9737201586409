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

#include "tempeq/mlp.h"

#include <algorithm>
#include <cmath>

#include "tempeq/error.h"
#include "tempeq/kernels.h"
#include "tempeq/rng.h"

namespace tempeq {

std::string_view activation_name(Activation a) {
  return a == Activation::kRelu ? "relu" : "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "identity") return Activation::kIdentity;
  throw SchemaError("unknown activation '" + std::string(name) + "'");
}

std::size_t MlpParams::input_dim() const {
  return layers.empty() ? 0 : layers.front().fan_in();
}

std::size_t MlpParams::output_dim() const {
  return layers.empty() ? 0 : layers.back().fan_out();
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

GradStore GradStore::zeros_like(const MlpParams& params) {
  GradStore g;
  g.layers.reserve(params.layers.size());
  for (const auto& l : params.layers) {
    g.layers.push_back({Tensor2(l.fan_out(), l.fan_in()), std::vector<double>(l.fan_out())});
  }
  return g;
}

void GradStore::set_zero() {
  for (auto& l : layers) {
    std::fill(l.weight.flat().begin(), l.weight.flat().end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
}

void GradStore::add(const GradStore& other, double scale) {
  if (other.layers.size() != layers.size()) throw ShapeError("GradStore::add: layer count");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    require_same_shape(layers[l].weight, other.layers[l].weight, "GradStore::add");
    auto dst = layers[l].weight.flat();
    auto src = other.layers[l].weight.flat();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
    for (std::size_t i = 0; i < layers[l].bias.size(); ++i)
      layers[l].bias[i] += scale * other.layers[l].bias[i];
  }
}

std::vector<ParamBlock> param_blocks(MlpParams& params) {
  std::vector<ParamBlock> blocks;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& layer = params.layers[l];
    const std::string prefix = "layer" + std::to_string(l);
    blocks.push_back({prefix + ".weight", layer.weight.flat(), false});
    blocks.push_back({prefix + ".bias", layer.bias, true});
  }
  return blocks;
}

std::vector<ParamBlock> grad_blocks(GradStore& grads) {
  std::vector<ParamBlock> blocks;
  for (std::size_t l = 0; l < grads.layers.size(); ++l) {
    auto& layer = grads.layers[l];
    const std::string prefix = "layer" + std::to_string(l);
    blocks.push_back({prefix + ".weight", layer.weight.flat(), false});
    blocks.push_back({prefix + ".bias", layer.bias, true});
  }
  return blocks;
}

MlpParams init_mlp(std::span<const std::size_t> dims, std::span<const Activation> activations,
                   std::uint64_t seed) {
  if (dims.size() < 2) throw ConfigError("init_mlp: need at least two layer sizes");
  if (std::find(dims.begin(), dims.end(), std::size_t{0}) != dims.end())
    throw ConfigError("init_mlp: layer sizes must be >= 1");
  if (activations.size() != dims.size() - 1)
    throw ConfigError("init_mlp: one activation per layer required");
  if (activations.back() != Activation::kIdentity)
    throw ConfigError("init_mlp: final layer must be identity");

  Rng rng(seed);
  MlpParams params;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t in = dims[l];
    const std::size_t out = dims[l + 1];
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    Layer layer{Tensor2(out, in), std::vector<double>(out, 0.0), activations[l]};
    for (double& w : layer.weight.flat()) w = rng.uniform(-scale, scale);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

MlpParams init_mlp(std::span<const std::size_t> dims, std::uint64_t seed) {
  if (dims.size() < 2) throw ConfigError("init_mlp: need at least two layer sizes");
  std::vector<Activation> acts(dims.size() - 1, Activation::kRelu);
  acts.back() = Activation::kIdentity;
  return init_mlp(dims, acts, seed);
}

namespace {

void check_chain(const MlpParams& params, const Tensor2& input) {
  if (params.layers.empty()) throw ShapeError("mlp: no layers");
  if (input.cols() != params.input_dim()) {
    throw ShapeError("mlp: input has " + std::to_string(input.cols()) +
                     " columns, first layer expects " +
                     std::to_string(params.input_dim()));
  }
  for (std::size_t l = 1; l < params.layers.size(); ++l) {
    if (params.layers[l].fan_in() != params.layers[l - 1].fan_out())
      throw ShapeError("mlp: layer " + std::to_string(l) + " does not chain");
  }
}

Tensor2 affine(const Layer& layer, const Tensor2& x) {
  Tensor2 y(x.rows(), layer.fan_out());
  kernels::parallel::affine_forward(x.flat(), layer.weight.flat(), layer.bias, y.flat(),
                                    x.rows(), layer.fan_in(), layer.fan_out());
  return y;
}

Tensor2 activate(Activation act, Tensor2 z) {
  if (act == Activation::kRelu) {
    for (double& v : z.flat()) v = v > 0.0 ? v : 0.0;
  }
  return z;
}

}  // namespace

MlpForward mlp_apply(const MlpParams& params, const Tensor2& input) {
  check_chain(params, input);
  MlpForward fwd;
  fwd.trace.layer_inputs.reserve(params.layers.size());
  fwd.trace.pre_activations.reserve(params.layers.size());
  Tensor2 a = input;
  for (const auto& layer : params.layers) {
    Tensor2 z = affine(layer, a);
    fwd.trace.layer_inputs.push_back(std::move(a));
    a = activate(layer.activation, z);
    fwd.trace.pre_activations.push_back(std::move(z));
  }
  require_finite(a, "mlp output");
  fwd.output = std::move(a);
  return fwd;
}

Tensor2 mlp_eval(const MlpParams& params, const Tensor2& input) {
  check_chain(params, input);
  Tensor2 a = input;
  for (const auto& layer : params.layers) a = activate(layer.activation, affine(layer, a));
  require_finite(a, "mlp output");
  return a;
}

MlpBackward mlp_backward(const MlpParams& params, const MlpTrace& trace,
                         const Tensor2& upstream) {
  const std::size_t depth = params.layers.size();
  if (depth == 0) throw ShapeError("mlp_backward: no layers");
  if (trace.layer_inputs.size() != depth || trace.pre_activations.size() != depth)
    throw ShapeError("mlp_backward: trace does not match params");
  require_same_shape(upstream, trace.pre_activations.back(), "mlp_backward upstream");

  MlpBackward out{GradStore::zeros_like(params), Tensor2()};
  Tensor2 delta = upstream;
  for (std::size_t li = depth; li-- > 0;) {
    const Layer& layer = params.layers[li];
    const Tensor2& z = trace.pre_activations[li];
    const Tensor2& a = trace.layer_inputs[li];
    if (a.cols() != layer.fan_in() || z.cols() != layer.fan_out() || z.rows() != a.rows())
      throw ShapeError("mlp_backward: trace does not match params");
    if (layer.activation == Activation::kRelu) {
      auto d = delta.flat();
      auto zv = z.flat();
      for (std::size_t i = 0; i < d.size(); ++i)
        if (!(zv[i] > 0.0)) d[i] = 0.0;
    }
    auto& g = out.grads.layers[li];
    kernels::parallel::param_grad(delta.flat(), a.flat(), g.weight.flat(), g.bias, a.rows(),
                                  layer.fan_in(), layer.fan_out());
    Tensor2 next(a.rows(), layer.fan_in());
    kernels::parallel::input_grad(delta.flat(), layer.weight.flat(), next.flat(), a.rows(),
                                  layer.fan_in(), layer.fan_out());
    delta = std::move(next);
  }
  out.input_grad = std::move(delta);
  return out;
}

void zero_last_layer(MlpParams& params) {
  if (params.layers.empty()) return;
  auto& last = params.layers.back();
  std::fill(last.weight.flat().begin(), last.weight.flat().end(), 0.0);
  std::fill(last.bias.begin(), last.bias.end(), 0.0);
}

}  // namespace tempeq
