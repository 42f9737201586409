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

#include <algorithm>
#include <cmath>
#include <set>

#include "tempeq/error.h"
#include "tempeq/metrics.h"
#include "tempeq/rng.h"

namespace tempeq {
namespace {

using Labels = std::vector<char>;

// Exhaustive pair counting.
double oracle_auroc(const std::vector<double>& s, const Labels& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (!y[i] || y[j]) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      if (s[i] == s[j]) wins += 0.5;
    }
  return wins / pairs;
}

// Full threshold sweep: every distinct score as a ">= threshold" cut.
double oracle_prauc(const std::vector<double>& s, const Labels& y) {
  std::set<double, std::greater<>> thresholds(s.begin(), s.end());
  double total_pos = 0.0;
  for (char l : y) total_pos += l;
  double ap = 0.0, prev_recall = 0.0;
  for (double t : thresholds) {
    double tp = 0.0, predicted = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] >= t) {
        predicted += 1.0;
        tp += y[i];
      }
    const double recall = tp / total_pos;
    ap += (recall - prev_recall) * (tp / predicted);
    prev_recall = recall;
  }
  return ap;
}

TEST(Auroc, Examples) {
  const std::vector<double> s{0.9, 0.8, 0.3, 0.2};
  EXPECT_EQ(auroc(s, Labels{1, 1, 0, 0}), 1.0);
  EXPECT_EQ(auroc(s, Labels{0, 0, 1, 1}), 0.0);
  EXPECT_EQ(auroc(s, Labels{1, 0, 1, 0}), 0.75);
  EXPECT_EQ(auroc(std::vector<double>{0.5, 0.5}, Labels{1, 0}), 0.5);
}

TEST(Auroc, Errors) {
  EXPECT_THROW(auroc(std::vector<double>{0.1, 0.2}, Labels{1, 1}), DataError);
  EXPECT_THROW(auroc(std::vector<double>{0.1}, Labels{1, 0}), ShapeError);
  EXPECT_THROW(auroc(std::vector<double>{NAN, 0.2}, Labels{1, 0}), NumericalError);
}

TEST(Prauc, Examples) {
  EXPECT_EQ(prauc(std::vector<double>{0.9, 0.8, 0.3, 0.2}, Labels{1, 1, 0, 0}), 1.0);
  EXPECT_EQ(prauc(std::vector<double>{0.9, 0.8, 0.3}, Labels{0, 1, 0}), 0.5);
  EXPECT_THROW(prauc(std::vector<double>{0.1, 0.2}, Labels{0, 0}), DataError);
}

TEST(Prauc, ConstantScoresGivePrevalence) {
  for (auto [pos, n] : {std::pair{1, 20}, {5, 100}, {1, 10}, {10, 100}, {11, 100}, {3, 7}}) {
    Labels y(n, 0);
    std::fill(y.begin(), y.begin() + pos, 1);
    const std::vector<double> s(n, 0.42);
    EXPECT_EQ(prauc(s, y), static_cast<double>(pos) / n) << pos << "/" << n;
  }
  // Random-classifier baselines: 1:20 and roughly 1:9.
  Labels y20(20, 0);
  y20[3] = 1;
  EXPECT_EQ(prauc(std::vector<double>(20, 0.0), y20), 0.05);
  Labels y100(100, 0);
  std::fill(y100.begin(), y100.begin() + 11, 1);
  EXPECT_EQ(prauc(std::vector<double>(100, 0.0), y100), 0.11);
}

TEST(Metrics, MatchExhaustiveOraclesOnRandomInstances) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(rng.integer(2, 200));
    std::vector<double> s(n);
    Labels y(n);
    // Coarse scores on some trials so ties occur.
    const bool coarse = trial % 3 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = coarse ? static_cast<double>(rng.integer(0, 5)) : rng.normal(0, 1);
      y[i] = rng.bernoulli(0.3);
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(auroc(s, y), oracle_auroc(s, y), 1e-10);
    EXPECT_NEAR(prauc(s, y), oracle_prauc(s, y), 1e-10);
  }
}

TEST(Auroc, RankInvariantAndFlipComplement) {
  Rng rng(8);
  std::vector<double> s(50), transformed(50), negated(50);
  Labels y(50);
  for (std::size_t i = 0; i < 50; ++i) {
    s[i] = rng.normal(0, 1);
    transformed[i] = std::exp(3 * s[i]) + 2.0;
    negated[i] = -s[i];
    y[i] = i % 3 == 0;
  }
  EXPECT_NEAR(auroc(s, y), auroc(transformed, y), 1e-15);
  EXPECT_NEAR(auroc(s, y) + auroc(negated, y), 1.0, 1e-15);
}

TEST(BalancedAccuracy, Examples) {
  const Labels y{1, 1, 0, 0};
  EXPECT_EQ(balanced_accuracy(std::vector<double>{0.9, 0.8, 0.1, 0.2}, y), 1.0);
  EXPECT_EQ(balanced_accuracy(std::vector<double>{0.1, 0.1, 0.1, 0.1}, y), 0.5);
  EXPECT_EQ(balanced_accuracy(std::vector<double>{0.9, 0.9, 0.9, 0.9}, y), 0.5);
  // 5 positives with 4 predicted positive, 5 negatives with 3 predicted
  // negative: TPR 0.8, TNR 0.6.
  const Labels y10{1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
  const std::vector<double> s10{0.9, 0.9, 0.9, 0.9, 0.1, 0.1, 0.1, 0.1, 0.9, 0.9};
  EXPECT_NEAR(balanced_accuracy(s10, y10), 0.7, 1e-15);
  EXPECT_EQ(balanced_accuracy(std::vector<double>{0.4, 0.6}, Labels{1, 0}, 0.3), 0.5);
  EXPECT_THROW(balanced_accuracy(std::vector<double>{0.4}, Labels{1}), DataError);
}

TEST(Spearman, Values) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  EXPECT_NEAR(spearman(x, std::vector<double>{2, 4, 8, 16, 32}), 1.0, 1e-15);
  EXPECT_NEAR(spearman(x, std::vector<double>{5, 4, 3, 2, 1}), -1.0, 1e-15);
  EXPECT_EQ(spearman(x, std::vector<double>(5, 1.0)), 0.0);
  EXPECT_EQ(average_ranks(std::vector<double>{3, 1, 3}), (std::vector<double>{2.5, 1, 2.5}));
}

}  // namespace
}  // namespace tempeq
