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

// Dense kernels behind the MLP and the VICReg covariance term.
//
// Two implementations share one contract:
//   serial::   plain loops, the reference used by tests.
//   parallel:: OpenMP over the outermost output index.
// Every output element is accumulated by exactly one thread in the same order
// as the serial kernel, so both produce bitwise-identical results for any
// thread count. Training determinism depends on this.

#ifndef TEMPEQ_KERNELS_H_
#define TEMPEQ_KERNELS_H_

#include <cstddef>
#include <span>

namespace tempeq::kernels {

// All matrices are row-major. Shapes are given in the comment of each kernel.
#define TEMPEQ_KERNEL_DECLS                                                        \
  /* y[n x out] = x[n x in] * w[out x in]^T + b[out] */                            \
  void affine_forward(std::span<const double> x, std::span<const double> w,        \
                      std::span<const double> b, std::span<double> y,              \
                      std::size_t n, std::size_t in, std::size_t out);             \
  /* dx[n x in] = dy[n x out] * w[out x in] (overwrites dx) */                      \
  void input_grad(std::span<const double> dy, std::span<const double> w,           \
                  std::span<double> dx, std::size_t n, std::size_t in,             \
                  std::size_t out);                                                \
  /* dw[out x in] += dy[n x out]^T * x[n x in]; db[out] += colsum(dy) */           \
  void param_grad(std::span<const double> dy, std::span<const double> x,           \
                  std::span<double> dw, std::span<double> db, std::size_t n,       \
                  std::size_t in, std::size_t out);                                \
  /* g[d x d] = a[n x d]^T * a[n x d] (overwrites g) */                            \
  void gram(std::span<const double> a, std::span<double> g, std::size_t n,         \
            std::size_t d);                                                        \
  /* c[n x p] = a[n x m] * b[m x p] (overwrites c) */                               \
  void matmul(std::span<const double> a, std::span<const double> b,                \
              std::span<double> c, std::size_t n, std::size_t m, std::size_t p);

namespace serial {
TEMPEQ_KERNEL_DECLS
}  // namespace serial

namespace parallel {
TEMPEQ_KERNEL_DECLS
}  // namespace parallel

#undef TEMPEQ_KERNEL_DECLS

// Caps OpenMP worker threads (0 keeps the runtime default).
void set_thread_cap(int threads);
int thread_count();

}  // namespace tempeq::kernels

#endif  // TEMPEQ_KERNELS_H_
