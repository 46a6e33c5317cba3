// Copyright 2026 The whisqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference kernels against their OpenMP counterparts, plus a
// model forward/backward pass at a small and a mid-size configuration.

#include <benchmark/benchmark.h>

#include <vector>

#include "whisqa/kernels.hpp"
#include "whisqa/model.hpp"
#include "whisqa/rng.hpp"

namespace {

using namespace whisqa;

std::vector<double> random_doubles(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1, 1);
  return v;
}

FeatureStack random_stack(StackDims dims, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> data(dims.size());
  for (auto& x : data) x = static_cast<float>(rng.uniform(-1, 1));
  return FeatureStack(dims, std::move(data), dims.frames);
}

// Square problem of side state.range(0): C = A * B^T.
template <bool Parallel>
void BM_GemmNT(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_doubles(n * n, 1), b = random_doubles(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::gemm_nt<double>(n, n, n, a, b, c, false);
    } else {
      kernels::serial::gemm_nt<double>(n, n, n, a, b, c, false);
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}

template <bool Parallel>
void BM_GemmNN(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_doubles(n * n, 3), b = random_doubles(n * n, 4);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::gemm_nn<double>(n, n, n, a, b, c, false);
    } else {
      kernels::serial::gemm_nn<double>(n, n, n, a, b, c, false);
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}

template <bool Parallel>
void BM_GemmTN(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_doubles(n * n, 5), b = random_doubles(n * n, 6);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::gemm_tn<double>(n, n, n, a, b, c, false);
    } else {
      kernels::serial::gemm_tn<double>(n, n, n, a, b, c, false);
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}

// 13 layers of `frames` x 768 float features fused into doubles.
template <bool Parallel>
void BM_Fuse(benchmark::State& state) {
  const StackDims dims{13, static_cast<std::size_t>(state.range(0)), 768};
  const auto stack = random_stack(dims, 7);
  const auto alpha = random_doubles(dims.layers, 8);
  const std::size_t plane = dims.frames * dims.features;
  std::vector<double> out(plane);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::fuse_layers<double, float>(dims.layers, plane, stack.data(), alpha, out);
    } else {
      kernels::serial::fuse_layers<double, float>(dims.layers, plane, stack.data(), alpha, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(dims.size() * sizeof(float)));
}

ArchConfig bench_arch(std::size_t frames, std::size_t features, std::size_t d) {
  ArchConfig a;
  a.layer_count = 13;
  a.frame_count = frames;
  a.feature_dim = features;
  a.model_dim = d;
  return a;
}

void BM_ModelForward(benchmark::State& state) {
  const Model<double> model(bench_arch(static_cast<std::size_t>(state.range(0)), 768, 256));
  const auto params = model.init_params(1);
  const auto stack = random_stack(model.config().stack_dims(), 9);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(stack, params).scores[0]);
}

void BM_ModelGradients(benchmark::State& state) {
  const Model<double> model(bench_arch(static_cast<std::size_t>(state.range(0)), 768, 256));
  const auto params = model.init_params(1);
  const auto stack = random_stack(model.config().stack_dims(), 10);
  const std::vector<double> weights = {1.0};
  for (auto _ : state) benchmark::DoNotOptimize(model.gradients(stack, params, weights).data());
}

BENCHMARK(BM_GemmNT<false>)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GemmNT<true>)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GemmNN<false>)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GemmNN<true>)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GemmTN<false>)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GemmTN<true>)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Fuse<false>)->Arg(150)->Arg(1500)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Fuse<true>)->Arg(150)->Arg(1500)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ModelForward)->Arg(50)->Arg(150)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ModelGradients)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
