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

#include "tempeq/tensor.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "tempeq/error.h"

namespace tempeq {

Tensor2::Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("Tensor2: data length " + std::to_string(data_.size()) +
                     " != " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Tensor2::Tensor2(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("Tensor2: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

void require_finite(const Tensor2& t, std::string_view what) {
  const auto values = t.flat();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      const std::size_t cols = std::max<std::size_t>(t.cols(), 1);
      throw NumericalError("non-finite value in " + std::string(what) + " at (" +
                           std::to_string(i / cols) + ", " + std::to_string(i % cols) +
                           ")");
    }
  }
}

void require_same_shape(const Tensor2& a, const Tensor2& b, std::string_view what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": shape " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

Tensor2 hconcat(const Tensor2& a, const Tensor2& b) {
  if (a.rows() != b.rows()) throw ShapeError("hconcat: row count mismatch");
  Tensor2 out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto dst = out.row(r);
    std::copy(a.row(r).begin(), a.row(r).end(), dst.begin());
    std::copy(b.row(r).begin(), b.row(r).end(), dst.begin() + a.cols());
  }
  return out;
}

Tensor2 vconcat(const Tensor2& a, const Tensor2& b) {
  if (a.cols() != b.cols()) throw ShapeError("vconcat: column count mismatch");
  std::vector<double> data(a.values());
  data.insert(data.end(), b.values().begin(), b.values().end());
  return Tensor2(a.rows() + b.rows(), a.cols(), std::move(data));
}

Tensor2 row_slice(const Tensor2& t, std::size_t begin, std::size_t end) {
  if (begin > end || end > t.rows()) throw ShapeError("row_slice: bad range");
  auto first = t.values().begin() + static_cast<std::ptrdiff_t>(begin * t.cols());
  auto last = t.values().begin() + static_cast<std::ptrdiff_t>(end * t.cols());
  return Tensor2(end - begin, t.cols(), std::vector<double>(first, last));
}

Tensor2 col_slice(const Tensor2& t, std::size_t begin, std::size_t end) {
  if (begin > end || end > t.cols()) throw ShapeError("col_slice: bad range");
  Tensor2 out(t.rows(), end - begin);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    auto src = t.row(r);
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(begin),
              src.begin() + static_cast<std::ptrdiff_t>(end), out.row(r).begin());
  }
  return out;
}

std::vector<double> row_norms(const Tensor2& t) {
  std::vector<double> norms(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    double acc = 0.0;
    for (double v : t.row(r)) acc += v * v;
    norms[r] = std::sqrt(acc);
  }
  return norms;
}

}  // namespace tempeq
