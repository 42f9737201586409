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

// Scalar objectives and their gradients.
//
// Every `*_grad` function ACCUMULATES `scale * dL/dX` into the given output
// tensors, which must already have the input's shape. Callers chain several
// terms into one gradient buffer this way.
//
// The time-equivariant objective is
//
//   L = contrastive + beta * (equivariance + upsilon * regularization)
//
// with the VICReg contrastive term on projections, a squared-error
// equivariance term on representations and a softplus penalty that keeps the
// displacement map away from zero norm.

#ifndef TEMPEQ_LOSSES_H_
#define TEMPEQ_LOSSES_H_

#include "tempeq/tensor.h"

namespace tempeq {

struct VicregWeights {
  double lambda_s = 15.0;
  double lambda_v = 25.0;
  double lambda_c = 5.0;
  double eps = 1e-4;

  void validate() const;
};

struct TcWeights {
  double beta = 1.0;
  double upsilon = 0.5;

  void validate() const;
};

struct LossBreakdown {
  double s_term = 0.0;  // S(Z, Z')
  double v_term = 0.0;  // V(Z) + V(Z')
  double c_term = 0.0;  // C(Z) + C(Z')
  double contrastive = 0.0;
  double equivariance = 0.0;
  double regularization = 0.0;
  double total = 0.0;

  bool operator==(const LossBreakdown&) const = default;
};

// (1/n) sum_i ||z_i - z'_i||^2
double invariance_term(const Tensor2& z, const Tensor2& zp);
void invariance_term_grad(const Tensor2& z, const Tensor2& zp, double scale, Tensor2& dz,
                          Tensor2& dzp);

// (1/d) sum_j max(0, 1 - sqrt(Var_j + eps)), unbiased variance. Needs n >= 2.
double variance_term(const Tensor2& z, double eps);
void variance_term_grad(const Tensor2& z, double eps, double scale, Tensor2& dz);

// (1/d) sum_{i != j} Cov_ij^2, Cov = Zc^T Zc / (n - 1). Needs n >= 2.
double covariance_term(const Tensor2& z);
void covariance_term_grad(const Tensor2& z, double scale, Tensor2& dz);

// Fills s/v/c/contrastive of a breakdown:
// lambda_s S(Z,Z') + lambda_v (V(Z) + V(Z')) + lambda_c (C(Z) + C(Z')).
LossBreakdown vicreg_loss(const Tensor2& z, const Tensor2& zp, const VicregWeights& w);
void vicreg_loss_grad(const Tensor2& z, const Tensor2& zp, const VicregWeights& w,
                      double scale, Tensor2& dz, Tensor2& dzp);

// (1/n) sum_i ||target_i - predicted_i||^2; gradients flow to both arguments.
double equivariance_loss(const Tensor2& target, const Tensor2& predicted);
void equivariance_loss_grad(const Tensor2& target, const Tensor2& predicted, double scale,
                            Tensor2& dtarget, Tensor2& dpredicted);

// log(1 + exp(-x)) without overflow for any finite x.
double softplus_neg(double x);

// (1/n) sum_i log(1 + exp(-||dm_i||)). The gradient at a zero-norm row is
// taken as zero (the subgradient of the norm at the origin).
double dm_regularization(const Tensor2& displacements);
void dm_regularization_grad(const Tensor2& displacements, double scale, Tensor2& ddm);

// RankNet probability that item i outranks item j given the score difference:
// 1 / (1 + exp(-s_ij)). With the target class fixed at 1 its cross-entropy is
// -log P = log(1 + exp(-s_ij)), i.e. the displacement regularizer per row.
double ranknet_pair_probability(double s_ij);

double total_loss(double contrastive, double equivariance, double regularization,
                  const TcWeights& w);

}  // namespace tempeq

#endif  // TEMPEQ_LOSSES_H_
