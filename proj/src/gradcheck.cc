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

#include "tempeq/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "tempeq/error.h"

namespace tempeq {
namespace {

void record(GradAudit& audit, double analytic, double numeric, const std::string& where) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  const double rel = std::abs(analytic - numeric) / denom;
  ++audit.checked;
  if (audit.worst_location.empty() || rel > audit.max_rel_err) {
    audit.max_rel_err = rel;
    audit.worst_location = where;
  }
}

}  // namespace

GradAudit finite_diff_check(const PackLossFn& loss, std::vector<MlpParams> params, double step,
                            double tol) {
  if (!(step > 0.0)) throw DomainError("finite_diff_check: step must be > 0");

  std::vector<GradStore> analytic;
  const double base = loss(params, &analytic);
  if (!std::isfinite(base)) throw NumericalError("finite_diff_check: non-finite loss at base point");
  if (analytic.size() != params.size())
    throw ShapeError("finite_diff_check: gradient pack size mismatch");

  GradAudit audit;
  for (std::size_t net = 0; net < params.size(); ++net) {
    auto pblocks = param_blocks(params[net]);
    auto gblocks = grad_blocks(analytic[net]);
    if (pblocks.size() != gblocks.size())
      throw ShapeError("finite_diff_check: gradient shape mismatch");
    for (std::size_t b = 0; b < pblocks.size(); ++b) {
      auto values = pblocks[b].values;
      auto grad = gblocks[b].values;
      if (values.size() != grad.size())
        throw ShapeError("finite_diff_check: gradient shape mismatch");
      for (std::size_t i = 0; i < values.size(); ++i) {
        const std::string where =
            std::to_string(net) + "/" + pblocks[b].name + "[" + std::to_string(i) + "]";
        const double saved = values[i];
        values[i] = saved + step;
        const double plus = loss(params, nullptr);
        values[i] = saved - step;
        const double minus = loss(params, nullptr);
        values[i] = saved;
        if (!std::isfinite(plus) || !std::isfinite(minus))
          throw NumericalError("finite_diff_check: non-finite loss perturbing " + where);

        record(audit, grad[i], (plus - minus) / (2.0 * step), where);
      }
    }
  }
  audit.pass = audit.max_rel_err < tol;
  return audit;
}

GradAudit finite_diff_check(const LossFn& loss, const MlpParams& params, double step,
                            double tol) {
  PackLossFn pack = [&loss](std::span<const MlpParams> p, std::vector<GradStore>* grads) {
    if (grads == nullptr) return loss(p[0], nullptr);
    grads->assign(1, GradStore::zeros_like(p[0]));
    return loss(p[0], &(*grads)[0]);
  };
  return finite_diff_check(pack, std::vector<MlpParams>{params}, step, tol);
}

GradAudit finite_diff_check_inputs(const TensorLossFn& loss, const TensorGradFn& grad,
                                   std::vector<Tensor2> inputs, double step, double tol) {
  if (!(step > 0.0)) throw DomainError("finite_diff_check: step must be > 0");
  const std::vector<Tensor2> analytic = grad(inputs);
  if (analytic.size() != inputs.size())
    throw ShapeError("finite_diff_check: gradient count mismatch");

  GradAudit audit;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    require_same_shape(inputs[k], analytic[k], "finite_diff_check gradient");
    auto values = inputs[k].flat();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const std::string where = "input" + std::to_string(k) + "[" + std::to_string(i) + "]";
      const double saved = values[i];
      values[i] = saved + step;
      const double plus = loss(inputs);
      values[i] = saved - step;
      const double minus = loss(inputs);
      values[i] = saved;
      if (!std::isfinite(plus) || !std::isfinite(minus))
        throw NumericalError("finite_diff_check: non-finite loss perturbing " + where);
      record(audit, analytic[k].flat()[i], (plus - minus) / (2.0 * step), where);
    }
  }
  audit.pass = audit.max_rel_err < tol;
  return audit;
}

}  // namespace tempeq
