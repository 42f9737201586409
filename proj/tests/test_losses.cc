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

#include <gtest/gtest.h>

#include <cmath>

#include "tempeq/error.h"
#include "tempeq/gradcheck.h"
#include "tempeq/losses.h"
#include "test_util.h"

namespace tempeq {
namespace {

using testing::random_tensor;

// Double-loop oracles, written from the definitions.
double oracle_variance(const Tensor2& z, double eps) {
  const double n = static_cast<double>(z.rows());
  double total = 0.0;
  for (std::size_t j = 0; j < z.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < z.rows(); ++i) mean += z(i, j);
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < z.rows(); ++i) var += (z(i, j) - mean) * (z(i, j) - mean);
    var /= n - 1.0;
    total += std::max(0.0, 1.0 - std::sqrt(var + eps));
  }
  return total / static_cast<double>(z.cols());
}

double oracle_covariance(const Tensor2& z) {
  const std::size_t n = z.rows(), d = z.cols();
  std::vector<double> mean(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) mean[j] += z(i, j);
    mean[j] /= static_cast<double>(n);
  }
  double total = 0.0;
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      if (a == b) continue;
      double cov = 0.0;
      for (std::size_t i = 0; i < n; ++i) cov += (z(i, a) - mean[a]) * (z(i, b) - mean[b]);
      cov /= static_cast<double>(n - 1);
      total += cov * cov;
    }
  return total / static_cast<double>(d);
}

TEST(Invariance, Examples) {
  const Tensor2 z{{1, 0}, {2, 3}};
  EXPECT_EQ(invariance_term(z, z), 0.0);
  EXPECT_DOUBLE_EQ(invariance_term(Tensor2{{1, 0}}, Tensor2{{0, 1}}), 2.0);
  Rng rng(1);
  const Tensor2 a = random_tensor(4, 3, rng), b = random_tensor(4, 3, rng);
  Tensor2 a3 = a, b3 = b;
  for (double& v : a3.flat()) v *= 3.0;
  for (double& v : b3.flat()) v *= 3.0;
  EXPECT_NEAR(invariance_term(a3, b3), 9.0 * invariance_term(a, b), 1e-12);
  EXPECT_THROW(invariance_term(a, Tensor2(4, 2)), ShapeError);
}

TEST(Variance, Examples) {
  EXPECT_NEAR(variance_term(Tensor2{{1, 2}, {1, 2}, {1, 2}}, 1e-4), 1.0 - std::sqrt(1e-4), 1e-15);
  EXPECT_EQ(variance_term(Tensor2{{2, 0}, {0, 2}}, 1e-4), 0.0);
  EXPECT_NEAR(variance_term(Tensor2{{1, 0}, {0, 1}}, 0.0), 1.0 - std::sqrt(0.5), 1e-15);
  EXPECT_THROW(variance_term(Tensor2{{1, 2}}, 1e-4), DataError);
}

TEST(Covariance, Examples) {
  EXPECT_EQ(covariance_term(Tensor2{{1, 0}, {-1, 0}}), 0.0);
  EXPECT_NEAR(covariance_term(Tensor2{{1, 0}, {0, 1}}), 0.25, 1e-15);
  EXPECT_THROW(covariance_term(Tensor2{{1, 2}}), DataError);
}

TEST(VarianceCovariance, MatchDoubleLoopOraclesOnRandomBatches) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(rng.integer(2, 32));
    const auto d = static_cast<std::size_t>(rng.integer(1, 16));
    const Tensor2 z = random_tensor(n, d, rng, rng.uniform(0.2, 2.0));
    EXPECT_NEAR(variance_term(z, 1e-4), oracle_variance(z, 1e-4), 1e-10);
    EXPECT_NEAR(covariance_term(z), oracle_covariance(z), 1e-10);
  }
}

TEST(VarianceCovariance, TranslationInvariant) {
  Rng rng(3);
  const Tensor2 z = random_tensor(6, 4, rng);
  Tensor2 shifted = z;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 4; ++j) shifted(i, j) += 0.5 * static_cast<double>(j) - 3.0;
  EXPECT_NEAR(variance_term(z, 1e-4), variance_term(shifted, 1e-4), 1e-12);
  EXPECT_NEAR(covariance_term(z), covariance_term(shifted), 1e-12);
}

TEST(Vicreg, Examples) {
  const Tensor2 z{{1, 0}, {0, 1}};
  const VicregWeights w{15, 25, 5, 0.0};
  const LossBreakdown b = vicreg_loss(z, z, w);
  EXPECT_EQ(b.s_term, 0.0);
  const double v = 1.0 - std::sqrt(0.5);
  EXPECT_NEAR(b.v_term, 2 * v, 1e-15);
  EXPECT_NEAR(b.c_term, 0.5, 1e-15);
  EXPECT_NEAR(b.contrastive, 25 * 2 * v + 5 * 0.5, 1e-12);
  EXPECT_NEAR(b.contrastive, 17.145, 1e-3);
  EXPECT_EQ(vicreg_loss(z, z, VicregWeights{0, 0, 0, 1e-4}).contrastive, 0.0);

  Rng rng(4);
  const Tensor2 a = random_tensor(5, 3, rng), c = random_tensor(5, 3, rng);
  const VicregWeights base{15, 25, 5, 1e-4};
  const VicregWeights dbl{30, 25, 5, 1e-4};
  const auto l1 = vicreg_loss(a, c, base), l2 = vicreg_loss(a, c, dbl);
  EXPECT_NEAR(l2.contrastive - l1.contrastive, 15 * l1.s_term, 1e-12);
}

TEST(Vicreg, ConstantEncoderCannotMinimize) {
  // Identical constant rows: invariance is zero but the variance hinge is not.
  const Tensor2 z(8, 4, 0.3);
  const auto b = vicreg_loss(z, z, VicregWeights{});
  EXPECT_EQ(b.s_term, 0.0);
  EXPECT_GT(b.v_term, 1.9);
}

TEST(Equivariance, Examples) {
  const Tensor2 t{{1, 1}};
  EXPECT_EQ(equivariance_loss(t, t), 0.0);
  EXPECT_DOUBLE_EQ(equivariance_loss(t, Tensor2{{0, 0}}), 2.0);
  Rng rng(5);
  const Tensor2 a = random_tensor(3, 4, rng), b = random_tensor(3, 4, rng);
  EXPECT_EQ(equivariance_loss(a, b), equivariance_loss(b, a));
}

TEST(Equivariance, GradientFlowsToBothArguments) {
  const Tensor2 target{{1, 2}};
  const Tensor2 predicted{{0, 0}};
  Tensor2 dt(1, 2), dp(1, 2);
  equivariance_loss_grad(target, predicted, 1.0, dt, dp);
  EXPECT_EQ(dt, (Tensor2{{2, 4}}));
  EXPECT_EQ(dp, (Tensor2{{-2, -4}}));
}

TEST(DmRegularization, Values) {
  EXPECT_EQ(dm_regularization(Tensor2(5, 3)), std::log(2.0));
  EXPECT_EQ(dm_regularization(Tensor2(128, 7)), std::log(2.0));
  Tensor2 one(1, 2);
  one(0, 0) = std::log(3.0);
  EXPECT_NEAR(dm_regularization(one), std::log(4.0 / 3.0), 1e-15);
  Tensor2 far(1, 1, 50.0);
  const double tiny = dm_regularization(far);
  EXPECT_GT(tiny, 0.0);
  EXPECT_LT(tiny, 1e-20);
  EXPECT_TRUE(std::isfinite(softplus_neg(-800.0)));
  EXPECT_NEAR(softplus_neg(-800.0), 800.0, 1e-12);
}

TEST(DmRegularization, StrictlyDecreasingAndBounded) {
  double prev = dm_regularization(Tensor2(1, 1));
  for (int k = 1; k <= 60; ++k) {
    const double v = dm_regularization(Tensor2(1, 1, 0.5 * k));
    EXPECT_LT(v, prev);
    EXPECT_GT(v, 0.0);
    prev = v;
  }
}

TEST(DmRegularization, GradientIsZeroOnlyAtZero) {
  Tensor2 dm{{0, 0}, {0.1, -0.2}};
  Tensor2 g(2, 2);
  dm_regularization_grad(dm, 1.0, g);
  EXPECT_EQ(g(0, 0), 0.0);
  EXPECT_EQ(g(0, 1), 0.0);
  EXPECT_NE(g(1, 0), 0.0);
  EXPECT_NE(g(1, 1), 0.0);
}

TEST(RankNet, Examples) {
  EXPECT_EQ(ranknet_pair_probability(0.0), 0.5);
  EXPECT_NEAR(ranknet_pair_probability(std::log(3.0)), 0.75, 1e-15);
  EXPECT_EQ(ranknet_pair_probability(1000.0), 1.0);
  double prev = 0.0;
  for (int k = -20; k <= 20; ++k) {
    const double p = ranknet_pair_probability(k);
    EXPECT_GT(p, prev);
    prev = p;
  }
}

TEST(RankNet, RegularizerIsNegativeLogProbability) {
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    const double norm = rng.uniform(0.0, 30.0);
    Tensor2 dm(1, 1, norm);
    EXPECT_NEAR(dm_regularization(dm), -std::log(ranknet_pair_probability(norm)), 1e-12);
  }
}

TEST(TotalLoss, Examples) {
  EXPECT_EQ(total_loss(3.5, 7.0, 0.2, TcWeights{0.0, 0.5}), 3.5);
  EXPECT_EQ(total_loss(1.0, 2.0, 4.0, TcWeights{1.0, 0.5}), 5.0);
  const TcWeights d;
  EXPECT_EQ(d.beta, 1.0);
  EXPECT_EQ(d.upsilon, 0.5);
  const VicregWeights v;
  EXPECT_EQ(v.lambda_s, 15.0);
  EXPECT_EQ(v.lambda_v, 25.0);
  EXPECT_EQ(v.lambda_c, 5.0);
  EXPECT_EQ(v.eps, 1e-4);
}

TEST(Weights, Validation) {
  EXPECT_THROW((VicregWeights{-1, 25, 5, 1e-4}.validate()), ConfigError);
  EXPECT_THROW((TcWeights{NAN, 0.5}.validate()), ConfigError);
}

// Gradients of every term against central differences.
struct GradCase {
  const char* name;
  std::size_t inputs;
  double (*loss)(std::span<const Tensor2>);
  void (*grad)(std::span<const Tensor2>, std::vector<Tensor2>&);
};

const GradCase kGradCases[] = {
    {"invariance", 2, [](std::span<const Tensor2> x) { return invariance_term(x[0], x[1]); },
     [](std::span<const Tensor2> x, std::vector<Tensor2>& g) {
       invariance_term_grad(x[0], x[1], 1.0, g[0], g[1]);
     }},
    {"variance", 1, [](std::span<const Tensor2> x) { return variance_term(x[0], 1e-4); },
     [](std::span<const Tensor2> x, std::vector<Tensor2>& g) {
       variance_term_grad(x[0], 1e-4, 1.0, g[0]);
     }},
    {"covariance", 1, [](std::span<const Tensor2> x) { return covariance_term(x[0]); },
     [](std::span<const Tensor2> x, std::vector<Tensor2>& g) {
       covariance_term_grad(x[0], 1.0, g[0]);
     }},
    {"vicreg", 2,
     [](std::span<const Tensor2> x) { return vicreg_loss(x[0], x[1], VicregWeights{}).contrastive; },
     [](std::span<const Tensor2> x, std::vector<Tensor2>& g) {
       vicreg_loss_grad(x[0], x[1], VicregWeights{}, 1.0, g[0], g[1]);
     }},
    {"equivariance", 2, [](std::span<const Tensor2> x) { return equivariance_loss(x[0], x[1]); },
     [](std::span<const Tensor2> x, std::vector<Tensor2>& g) {
       equivariance_loss_grad(x[0], x[1], 1.0, g[0], g[1]);
     }},
    {"dm_regularization", 1, [](std::span<const Tensor2> x) { return dm_regularization(x[0]); },
     [](std::span<const Tensor2> x, std::vector<Tensor2>& g) {
       dm_regularization_grad(x[0], 1.0, g[0]);
     }},
};

class LossGradient : public ::testing::TestWithParam<GradCase> {};

TEST_P(LossGradient, MatchesFiniteDifferences) {
  const GradCase c = GetParam();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    std::vector<Tensor2> inputs;
    for (std::size_t k = 0; k < c.inputs; ++k) inputs.push_back(random_tensor(7, 5, rng, 0.6));
    const auto audit = finite_diff_check_inputs(
        c.loss,
        [&](std::span<const Tensor2> x) {
          std::vector<Tensor2> g;
          for (const auto& t : x) g.emplace_back(t.rows(), t.cols());
          c.grad(x, g);
          return g;
        },
        inputs, 1e-5, 1e-4);
    EXPECT_TRUE(audit.pass) << c.name << " seed " << seed << ": " << audit.max_rel_err << " at "
                            << audit.worst_location;
  }
}

TEST_P(LossGradient, AccumulatesScaledGradient) {
  const GradCase c = GetParam();
  Rng rng(9);
  std::vector<Tensor2> inputs;
  for (std::size_t k = 0; k < c.inputs; ++k) inputs.push_back(random_tensor(4, 3, rng));
  std::vector<Tensor2> once, twice;
  for (const auto& t : inputs) {
    once.emplace_back(t.rows(), t.cols());
    twice.emplace_back(t.rows(), t.cols());
  }
  c.grad(inputs, once);
  c.grad(inputs, twice);
  c.grad(inputs, twice);
  for (std::size_t k = 0; k < inputs.size(); ++k)
    for (std::size_t i = 0; i < once[k].size(); ++i)
      EXPECT_NEAR(twice[k].flat()[i], 2.0 * once[k].flat()[i], 1e-12);
}

INSTANTIATE_TEST_SUITE_P(AllTerms, LossGradient, ::testing::ValuesIn(kGradCases),
                         [](const auto& info) { return std::string(info.param.name); });

}  // namespace
}  // namespace tempeq
