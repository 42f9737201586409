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

#include "tempeq/optim.h"

#include <cmath>
#include <numbers>
#include <string>

#include "tempeq/error.h"

namespace tempeq {

OptimizerState OptimizerState::for_blocks(std::span<const ParamBlock> params) {
  OptimizerState state;
  for (const auto& block : params) {
    state.first_moment.emplace_back(block.values.size(), 0.0);
    state.second_moment.emplace_back(block.values.size(), 0.0);
  }
  return state;
}

void adamw_step(std::span<const ParamBlock> params, std::span<const ParamBlock> grads,
                OptimizerState& state, double lr, double weight_decay) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size())
    throw ShapeError("adamw_step: block count mismatch");

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);

  for (std::size_t b = 0; b < params.size(); ++b) {
    auto p = params[b].values;
    auto g = grads[b].values;
    auto& m = state.first_moment[b];
    auto& v = state.second_moment[b];
    if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size())
      throw ShapeError("adamw_step: block '" + params[b].name + "' shape mismatch");
    const double decay = params[b].is_bias ? 0.0 : weight_decay;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= lr * (m_hat / (std::sqrt(v_hat) + state.eps)) + lr * decay * p[i];
    }
  }
}

double cosine_warmup_lr(std::uint64_t step, std::uint64_t total_steps,
                        std::uint64_t warmup_steps, double base_lr) {
  if (step >= total_steps) throw DomainError("cosine_warmup_lr: step past the schedule");
  if (warmup_steps >= total_steps)
    throw DomainError("cosine_warmup_lr: warm-up must be shorter than the schedule");
  if (step < warmup_steps)
    return base_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  const double progress = static_cast<double>(step - warmup_steps) /
                          static_cast<double>(total_steps - warmup_steps);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace tempeq
