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

#include "tempeq/kernels.h"

#include <algorithm>
#include <cstdint>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace tempeq::kernels {
namespace {

// Per-row bodies shared by both implementations. Inner loops are axpy-shaped
// (contiguous, no reductions) so the compiler vectorizes them without
// reassociating any sum.

inline void axpy(double alpha, const double* x, double* y, std::size_t len) {
  for (std::size_t j = 0; j < len; ++j) y[j] += alpha * x[j];
}

inline void affine_row(const double* x, const double* wt, const double* b, double* y,
                       std::size_t in, std::size_t out) {
  std::copy(b, b + out, y);
  for (std::size_t k = 0; k < in; ++k) axpy(x[k], wt + k * out, y, out);
}

inline void input_grad_row(const double* dy, const double* w, double* dx, std::size_t in,
                           std::size_t out) {
  std::fill(dx, dx + in, 0.0);
  for (std::size_t o = 0; o < out; ++o) axpy(dy[o], w + o * in, dx, in);
}

// Row o of dw accumulates over the batch in sample order.
inline void param_grad_row(const double* dy, const double* x, double* dw_row, double* db_o,
                           std::size_t o, std::size_t n, std::size_t in, std::size_t out) {
  double bias = *db_o;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = dy[i * out + o];
    axpy(g, x + i * in, dw_row, in);
    bias += g;
  }
  *db_o = bias;
}

inline void gram_row(const double* a, double* g_row, std::size_t r, std::size_t n,
                     std::size_t d) {
  std::fill(g_row, g_row + d, 0.0);
  for (std::size_t i = 0; i < n; ++i) axpy(a[i * d + r], a + i * d, g_row, d);
}

inline void matmul_row(const double* a_row, const double* b, double* c_row, std::size_t m,
                       std::size_t p) {
  std::fill(c_row, c_row + p, 0.0);
  for (std::size_t k = 0; k < m; ++k) axpy(a_row[k], b + k * p, c_row, p);
}

std::vector<double> transpose(std::span<const double> w, std::size_t out, std::size_t in) {
  std::vector<double> wt(in * out);
  for (std::size_t o = 0; o < out; ++o)
    for (std::size_t k = 0; k < in; ++k) wt[k * out + o] = w[o * in + k];
  return wt;
}

}  // namespace

namespace serial {

void affine_forward(std::span<const double> x, std::span<const double> w,
                    std::span<const double> b, std::span<double> y, std::size_t n,
                    std::size_t in, std::size_t out) {
  const auto wt = transpose(w, out, in);
  for (std::size_t i = 0; i < n; ++i)
    affine_row(x.data() + i * in, wt.data(), b.data(), y.data() + i * out, in, out);
}

void input_grad(std::span<const double> dy, std::span<const double> w, std::span<double> dx,
                std::size_t n, std::size_t in, std::size_t out) {
  for (std::size_t i = 0; i < n; ++i)
    input_grad_row(dy.data() + i * out, w.data(), dx.data() + i * in, in, out);
}

void param_grad(std::span<const double> dy, std::span<const double> x, std::span<double> dw,
                std::span<double> db, std::size_t n, std::size_t in, std::size_t out) {
  for (std::size_t o = 0; o < out; ++o)
    param_grad_row(dy.data(), x.data(), dw.data() + o * in, db.data() + o, o, n, in, out);
}

void gram(std::span<const double> a, std::span<double> g, std::size_t n, std::size_t d) {
  for (std::size_t r = 0; r < d; ++r) gram_row(a.data(), g.data() + r * d, r, n, d);
}

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t n, std::size_t m, std::size_t p) {
  for (std::size_t i = 0; i < n; ++i)
    matmul_row(a.data() + i * m, b.data(), c.data() + i * p, m, p);
}

}  // namespace serial

namespace parallel {

// OpenMP wants signed loop indices.
using Index = std::int64_t;

void affine_forward(std::span<const double> x, std::span<const double> w,
                    std::span<const double> b, std::span<double> y, std::size_t n,
                    std::size_t in, std::size_t out) {
  const auto wt = transpose(w, out, in);
  const Index rows = static_cast<Index>(n);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < rows; ++i) {
    const auto r = static_cast<std::size_t>(i);
    affine_row(x.data() + r * in, wt.data(), b.data(), y.data() + r * out, in, out);
  }
}

void input_grad(std::span<const double> dy, std::span<const double> w, std::span<double> dx,
                std::size_t n, std::size_t in, std::size_t out) {
  const Index rows = static_cast<Index>(n);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < rows; ++i) {
    const auto r = static_cast<std::size_t>(i);
    input_grad_row(dy.data() + r * out, w.data(), dx.data() + r * in, in, out);
  }
}

void param_grad(std::span<const double> dy, std::span<const double> x, std::span<double> dw,
                std::span<double> db, std::size_t n, std::size_t in, std::size_t out) {
  const Index outs = static_cast<Index>(out);
#pragma omp parallel for schedule(static)
  for (Index oi = 0; oi < outs; ++oi) {
    const auto o = static_cast<std::size_t>(oi);
    param_grad_row(dy.data(), x.data(), dw.data() + o * in, db.data() + o, o, n, in, out);
  }
}

void gram(std::span<const double> a, std::span<double> g, std::size_t n, std::size_t d) {
  const Index dims = static_cast<Index>(d);
#pragma omp parallel for schedule(static)
  for (Index ri = 0; ri < dims; ++ri) {
    const auto r = static_cast<std::size_t>(ri);
    gram_row(a.data(), g.data() + r * d, r, n, d);
  }
}

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t n, std::size_t m, std::size_t p) {
  const Index rows = static_cast<Index>(n);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < rows; ++i) {
    const auto r = static_cast<std::size_t>(i);
    matmul_row(a.data() + r * m, b.data(), c.data() + r * p, m, p);
  }
}

}  // namespace parallel

void set_thread_cap(int threads) {
#if defined(_OPENMP)
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

int thread_count() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace tempeq::kernels
