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

#include "tempeq/losses.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tempeq/error.h"
#include "tempeq/kernels.h"

namespace tempeq {

void VicregWeights::validate() const {
  if (!(lambda_s >= 0 && lambda_v >= 0 && lambda_c >= 0 && eps >= 0))
    throw ConfigError("vicreg weights must be >= 0");
}

void TcWeights::validate() const {
  if (!(std::isfinite(beta) && std::isfinite(upsilon)))
    throw ConfigError("tc weights must be finite");
}

namespace {

void require_batch(const Tensor2& z, std::size_t min_rows, const char* what) {
  if (z.rows() < min_rows || z.cols() == 0)
    throw DataError(std::string(what) + ": needs at least " + std::to_string(min_rows) +
                    " rows, got " + std::to_string(z.rows()));
}

std::vector<double> column_means(const Tensor2& z) {
  std::vector<double> mean(z.cols(), 0.0);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto row = z.row(i);
    for (std::size_t j = 0; j < z.cols(); ++j) mean[j] += row[j];
  }
  for (double& m : mean) m /= static_cast<double>(z.rows());
  return mean;
}

Tensor2 centered(const Tensor2& z) {
  const auto mean = column_means(z);
  Tensor2 c = z;
  for (std::size_t i = 0; i < c.rows(); ++i) {
    auto row = c.row(i);
    for (std::size_t j = 0; j < c.cols(); ++j) row[j] -= mean[j];
  }
  return c;
}

std::vector<double> unbiased_variances(const Tensor2& zc) {
  std::vector<double> var(zc.cols(), 0.0);
  for (std::size_t i = 0; i < zc.rows(); ++i) {
    auto row = zc.row(i);
    for (std::size_t j = 0; j < zc.cols(); ++j) var[j] += row[j] * row[j];
  }
  for (double& v : var) v /= static_cast<double>(zc.rows() - 1);
  return var;
}

Tensor2 covariance(const Tensor2& zc) {
  const std::size_t d = zc.cols();
  Tensor2 cov(d, d);
  kernels::parallel::gram(zc.flat(), cov.flat(), zc.rows(), d);
  const double inv = 1.0 / static_cast<double>(zc.rows() - 1);
  for (double& v : cov.flat()) v *= inv;
  return cov;
}

}  // namespace

double invariance_term(const Tensor2& z, const Tensor2& zp) {
  require_same_shape(z, zp, "invariance_term");
  require_batch(z, 1, "invariance_term");
  double acc = 0.0;
  auto a = z.flat();
  auto b = zp.flat();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return acc / static_cast<double>(z.rows());
}

void invariance_term_grad(const Tensor2& z, const Tensor2& zp, double scale, Tensor2& dz,
                          Tensor2& dzp) {
  require_same_shape(z, zp, "invariance_term");
  require_same_shape(z, dz, "invariance_term grad");
  require_same_shape(zp, dzp, "invariance_term grad");
  const double k = 2.0 * scale / static_cast<double>(z.rows());
  auto a = z.flat();
  auto b = zp.flat();
  auto ga = dz.flat();
  auto gb = dzp.flat();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double g = k * (a[i] - b[i]);
    ga[i] += g;
    gb[i] -= g;
  }
}

double variance_term(const Tensor2& z, double eps) {
  require_batch(z, 2, "variance_term");
  const auto var = unbiased_variances(centered(z));
  double acc = 0.0;
  for (double v : var) acc += std::max(0.0, 1.0 - std::sqrt(v + eps));
  return acc / static_cast<double>(z.cols());
}

void variance_term_grad(const Tensor2& z, double eps, double scale, Tensor2& dz) {
  require_batch(z, 2, "variance_term");
  require_same_shape(z, dz, "variance_term grad");
  const Tensor2 zc = centered(z);
  const auto var = unbiased_variances(zc);
  const double n1 = static_cast<double>(z.rows() - 1);
  const double d = static_cast<double>(z.cols());
  // d/dz_ij of -(1/d) sqrt(var_j + eps) = -(1/d) zc_ij / ((n-1) std_j)
  std::vector<double> coef(z.cols(), 0.0);
  for (std::size_t j = 0; j < z.cols(); ++j) {
    const double std_j = std::sqrt(var[j] + eps);
    if (1.0 - std_j > 0.0 && std_j > 0.0) coef[j] = -scale / (d * n1 * std_j);
  }
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto src = zc.row(i);
    auto dst = dz.row(i);
    for (std::size_t j = 0; j < z.cols(); ++j) dst[j] += coef[j] * src[j];
  }
}

double covariance_term(const Tensor2& z) {
  require_batch(z, 2, "covariance_term");
  const Tensor2 cov = covariance(centered(z));
  const std::size_t d = z.cols();
  double acc = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    auto row = cov.row(a);
    for (std::size_t b = 0; b < d; ++b) {
      if (a != b) acc += row[b] * row[b];
    }
  }
  return acc / static_cast<double>(d);
}

void covariance_term_grad(const Tensor2& z, double scale, Tensor2& dz) {
  require_batch(z, 2, "covariance_term");
  require_same_shape(z, dz, "covariance_term grad");
  const Tensor2 zc = centered(z);
  Tensor2 g = covariance(zc);
  const std::size_t d = z.cols();
  const std::size_t n = z.rows();
  // dC/dZc = (2 / (n-1)) Zc G with G = (2/d) offdiag(Cov). Rows of Zc sum to
  // zero, so the centering step adds nothing further.
  const double k = scale * 4.0 / (static_cast<double>(d) * static_cast<double>(n - 1));
  for (std::size_t a = 0; a < d; ++a) {
    auto row = g.row(a);
    for (std::size_t b = 0; b < d; ++b) row[b] = a == b ? 0.0 : k * row[b];
  }
  Tensor2 prod(n, d);
  kernels::parallel::matmul(zc.flat(), g.flat(), prod.flat(), n, d, d);
  auto out = dz.flat();
  auto p = prod.flat();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += p[i];
}

LossBreakdown vicreg_loss(const Tensor2& z, const Tensor2& zp, const VicregWeights& w) {
  LossBreakdown out;
  out.s_term = invariance_term(z, zp);
  out.v_term = variance_term(z, w.eps) + variance_term(zp, w.eps);
  out.c_term = covariance_term(z) + covariance_term(zp);
  out.contrastive = w.lambda_s * out.s_term + w.lambda_v * out.v_term + w.lambda_c * out.c_term;
  return out;
}

void vicreg_loss_grad(const Tensor2& z, const Tensor2& zp, const VicregWeights& w, double scale,
                      Tensor2& dz, Tensor2& dzp) {
  if (w.lambda_s != 0.0) invariance_term_grad(z, zp, scale * w.lambda_s, dz, dzp);
  if (w.lambda_v != 0.0) {
    variance_term_grad(z, w.eps, scale * w.lambda_v, dz);
    variance_term_grad(zp, w.eps, scale * w.lambda_v, dzp);
  }
  if (w.lambda_c != 0.0) {
    covariance_term_grad(z, scale * w.lambda_c, dz);
    covariance_term_grad(zp, scale * w.lambda_c, dzp);
  }
}

double equivariance_loss(const Tensor2& target, const Tensor2& predicted) {
  require_same_shape(target, predicted, "equivariance_loss");
  return invariance_term(target, predicted);
}

void equivariance_loss_grad(const Tensor2& target, const Tensor2& predicted, double scale,
                            Tensor2& dtarget, Tensor2& dpredicted) {
  invariance_term_grad(target, predicted, scale, dtarget, dpredicted);
}

double softplus_neg(double x) {
  // log(1 + e^{-x}) = max(-x, 0) + log1p(e^{-|x|})
  return std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double dm_regularization(const Tensor2& displacements) {
  if (displacements.rows() == 0) return 0.0;
  // Compensated sum, so a batch of identical rows averages back to the row
  // value (ln 2 for an all-zero displacement).
  double acc = 0.0;
  double carry = 0.0;
  for (double norm : row_norms(displacements)) {
    const double v = softplus_neg(norm);
    const double t = acc + v;
    carry += std::abs(acc) >= std::abs(v) ? (acc - t) + v : (v - t) + acc;
    acc = t;
  }
  return (acc + carry) / static_cast<double>(displacements.rows());
}

void dm_regularization_grad(const Tensor2& displacements, double scale, Tensor2& ddm) {
  require_same_shape(displacements, ddm, "dm_regularization grad");
  if (displacements.rows() == 0) return;
  const auto norms = row_norms(displacements);
  const double k = scale / static_cast<double>(displacements.rows());
  for (std::size_t i = 0; i < displacements.rows(); ++i) {
    const double norm = norms[i];
    if (norm == 0.0) continue;
    // d/dm softplus(-||m||) = -sigmoid(-||m||) m / ||m||
    const double coef = -k * ranknet_pair_probability(-norm) / norm;
    auto src = displacements.row(i);
    auto dst = ddm.row(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] += coef * src[j];
  }
}

double ranknet_pair_probability(double s_ij) {
  if (s_ij >= 0.0) return 1.0 / (1.0 + std::exp(-s_ij));
  const double e = std::exp(s_ij);
  return e / (1.0 + e);
}

double total_loss(double contrastive, double equivariance, double regularization,
                  const TcWeights& w) {
  return contrastive + w.beta * (equivariance + w.upsilon * regularization);
}

}  // namespace tempeq
