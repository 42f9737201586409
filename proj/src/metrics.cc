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

#include "tempeq/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tempeq/error.h"

namespace tempeq {
namespace {

struct ClassCounts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

ClassCounts count_classes(std::span<const double> scores, LabelSpan labels) {
  if (scores.size() != labels.size()) throw ShapeError("metric: scores/labels length mismatch");
  ClassCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!std::isfinite(scores[i])) throw NumericalError("metric: non-finite score");
    labels[i] ? ++c.positives : ++c.negatives;
  }
  return c;
}

void require_both_classes(const ClassCounts& c, const char* metric) {
  if (c.positives == 0 || c.negatives == 0)
    throw DataError(std::string(metric) + ": both classes must be present");
}

// Indices sorted by descending score; ties keep input order.
std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double auroc(std::span<const double> scores, LabelSpan labels) {
  const auto c = count_classes(scores, labels);
  require_both_classes(c, "auroc");
  const auto ranks = average_ranks(scores);
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i]) positive_rank_sum += ranks[i];
  const double p = static_cast<double>(c.positives);
  const double n = static_cast<double>(c.negatives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double prauc(std::span<const double> scores, LabelSpan labels) {
  const auto c = count_classes(scores, labels);
  if (c.positives == 0) throw DataError("prauc: no positive labels");
  const auto idx = descending_order(scores);
  const double total_pos = static_cast<double>(c.positives);
  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0;
  std::size_t seen = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    const double threshold = scores[idx[i]];
    while (i < idx.size() && scores[idx[i]] == threshold) {
      if (labels[idx[i]]) ++tp;
      ++seen;
      ++i;
    }
    const double recall = static_cast<double>(tp) / total_pos;
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

double balanced_accuracy(std::span<const double> scores, LabelSpan labels, double threshold) {
  const auto c = count_classes(scores, labels);
  require_both_classes(c, "balanced_accuracy");
  std::size_t tp = 0;
  std::size_t tn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] && predicted) ++tp;
    if (!labels[i] && !predicted) ++tn;
  }
  const double tpr = static_cast<double>(tp) / static_cast<double>(c.positives);
  const double tnr = static_cast<double>(tn) / static_cast<double>(c.negatives);
  return 0.5 * (tpr + tnr);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("spearman: length mismatch");
  if (x.size() < 2) throw DataError("spearman: needs at least two points");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace tempeq
