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

#ifndef TEMPEQ_OPTIM_H_
#define TEMPEQ_OPTIM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "tempeq/mlp.h"

namespace tempeq {

// Adam moments for a flat list of parameter blocks, slot i pairing with
// block i of whatever list the state was created for.
struct OptimizerState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;

  static OptimizerState for_blocks(std::span<const ParamBlock> params);
  bool operator==(const OptimizerState&) const = default;
};

// One decoupled-weight-decay Adam update:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
//   p <- p - lr * (m_hat / (sqrt(v_hat) + eps)) - lr * wd * p
// Bias blocks are not decayed.
void adamw_step(std::span<const ParamBlock> params, std::span<const ParamBlock> grads,
                OptimizerState& state, double lr, double weight_decay);

// Linear ramp 0 -> base_lr over the warm-up, then half-cosine to 0.
double cosine_warmup_lr(std::uint64_t step, std::uint64_t total_steps,
                        std::uint64_t warmup_steps, double base_lr);

}  // namespace tempeq

#endif  // TEMPEQ_OPTIM_H_
