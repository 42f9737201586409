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

#ifndef TEMPEQ_TENSOR_H_
#define TEMPEQ_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace tempeq {

// Dense row-major matrix of doubles. Batches are stored one sample per row.
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data);
  Tensor2(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool operator==(const Tensor2&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Throws NumericalError naming `what` and the first offending (row, col).
void require_finite(const Tensor2& t, std::string_view what);
void require_same_shape(const Tensor2& a, const Tensor2& b, std::string_view what);

// Horizontal concatenation [a | b]; row counts must match.
Tensor2 hconcat(const Tensor2& a, const Tensor2& b);
// Vertical concatenation; column counts must match.
Tensor2 vconcat(const Tensor2& a, const Tensor2& b);
// Rows [begin, end).
Tensor2 row_slice(const Tensor2& t, std::size_t begin, std::size_t end);
// Columns [begin, end).
Tensor2 col_slice(const Tensor2& t, std::size_t begin, std::size_t end);

// Row-wise Euclidean norms.
std::vector<double> row_norms(const Tensor2& t);

}  // namespace tempeq

#endif  // TEMPEQ_TENSOR_H_
