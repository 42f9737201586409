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

// Serial reference vs OpenMP kernels at the training shapes (batch of 256
// rows, the widest encoder/projector layers).

#include <benchmark/benchmark.h>

#include <vector>

#include "tempeq/kernels.h"
#include "tempeq/rng.h"

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  tempeq::Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal(0.0, 1.0);
  return v;
}

template <bool kParallel>
void BM_AffineForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto in = static_cast<std::size_t>(state.range(1));
  const auto out = static_cast<std::size_t>(state.range(2));
  const auto x = random_vec(n * in, 1);
  const auto w = random_vec(out * in, 2);
  const auto b = random_vec(out, 3);
  std::vector<double> y(n * out);
  for (auto _ : state) {
    if constexpr (kParallel)
      tempeq::kernels::parallel::affine_forward(x, w, b, y, n, in, out);
    else
      tempeq::kernels::serial::affine_forward(x, w, b, y, n, in, out);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * in * out));
}

template <bool kParallel>
void BM_ParamGrad(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto in = static_cast<std::size_t>(state.range(1));
  const auto out = static_cast<std::size_t>(state.range(2));
  const auto dy = random_vec(n * out, 4);
  const auto x = random_vec(n * in, 5);
  std::vector<double> dw(out * in);
  std::vector<double> db(out);
  for (auto _ : state) {
    if constexpr (kParallel)
      tempeq::kernels::parallel::param_grad(dy, x, dw, db, n, in, out);
    else
      tempeq::kernels::serial::param_grad(dy, x, dw, db, n, in, out);
    benchmark::DoNotOptimize(dw.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * in * out));
}

template <bool kParallel>
void BM_Gram(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const auto a = random_vec(n * d, 6);
  std::vector<double> g(d * d);
  for (auto _ : state) {
    if constexpr (kParallel)
      tempeq::kernels::parallel::gram(a, g, n, d);
    else
      tempeq::kernels::serial::gram(a, g, n, d);
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * d * d));
}

}  // namespace

BENCHMARK(BM_AffineForward<false>)->Args({256, 64, 256})->Args({256, 256, 256});
BENCHMARK(BM_AffineForward<true>)->Args({256, 64, 256})->Args({256, 256, 256});
BENCHMARK(BM_ParamGrad<false>)->Args({256, 256, 256});
BENCHMARK(BM_ParamGrad<true>)->Args({256, 256, 256});
BENCHMARK(BM_Gram<false>)->Args({128, 256});
BENCHMARK(BM_Gram<true>)->Args({128, 256});

BENCHMARK_MAIN();
