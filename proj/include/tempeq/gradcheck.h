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

#ifndef TEMPEQ_GRADCHECK_H_
#define TEMPEQ_GRADCHECK_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tempeq/mlp.h"
#include "tempeq/tensor.h"

namespace tempeq {

struct GradAudit {
  double max_rel_err = 0.0;
  bool pass = true;
  std::size_t checked = 0;
  // "<net index>/<block name>[<flat index>]" of the worst entry.
  std::string worst_location;
};

// Loss over a pack of networks. When `grads` is non-null the callee fills it
// with the analytic gradient (one GradStore per network).
using PackLossFn =
    std::function<double(std::span<const MlpParams> params, std::vector<GradStore>* grads)>;
using LossFn = std::function<double(const MlpParams& params, GradStore* grad)>;

// Compares the analytic gradient with central differences of step `step`,
// entry by entry, using |a - n| / max(|a|, |n|, 1e-8). A non-finite loss at
// any probe throws NumericalError naming the perturbed entry.
GradAudit finite_diff_check(const PackLossFn& loss, std::vector<MlpParams> params, double step,
                            double tol);
GradAudit finite_diff_check(const LossFn& loss, const MlpParams& params, double step,
                            double tol);

// Same comparison for a loss of plain tensors; `grad` returns dL/dX for every
// input in order.
using TensorLossFn = std::function<double(std::span<const Tensor2> inputs)>;
using TensorGradFn = std::function<std::vector<Tensor2>(std::span<const Tensor2> inputs)>;
GradAudit finite_diff_check_inputs(const TensorLossFn& loss, const TensorGradFn& grad,
                                   std::vector<Tensor2> inputs, double step, double tol);

}  // namespace tempeq

#endif  // TEMPEQ_GRADCHECK_H_
