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

// Binary classification metrics over (score, label) lists.

#ifndef TEMPEQ_METRICS_H_
#define TEMPEQ_METRICS_H_

#include <span>
#include <vector>

namespace tempeq {

// Labels are passed as chars (0/1) because std::vector<bool> has no span.
using LabelSpan = std::span<const char>;

// Probability that a random positive scores above a random negative, ties
// counted as 1/2. Requires both classes. O(n log n) via average ranks.
double auroc(std::span<const double> scores, LabelSpan labels);

// Average precision: sum over distinct score thresholds (descending) of
// (recall_k - recall_{k-1}) * precision_k. Tied scores enter together, so
// constant scores give the prevalence. Requires at least one positive.
double prauc(std::span<const double> scores, LabelSpan labels);

// (TPR + TNR) / 2 with score >= threshold predicted positive. Requires both
// classes.
double balanced_accuracy(std::span<const double> scores, LabelSpan labels,
                         double threshold = 0.5);

// 1-based ranks with ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of average ranks. Returns 0 when either side is
// constant.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace tempeq

#endif  // TEMPEQ_METRICS_H_
