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

#pragma once

// Dense kernels used by the model and the mel frontend.
//
// Every kernel exists twice: `serial::` is the plain reference loop nest and
// `parallel::` is the OpenMP version the library actually calls. The parallel
// versions only split work across output rows and keep the per-element
// summation order of the reference, so both produce bit-identical results
// for any thread count. tests/unit/kernels_test.cpp checks that.

#include <cassert>
#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace whisqa::kernels {

/// Below this many multiply-adds a kernel stays on the calling thread.
inline constexpr std::size_t kParallelWork = 1u << 15;

namespace serial {

/// C[m,n] (+)= A[m,k] * B[n,k]^T
template <class T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, std::span<const T> a,
             std::span<const T> b, std::span<T> c, bool accumulate) {
  assert(a.size() >= m * k && b.size() >= n * k && c.size() >= m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T acc = 0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[j * k + p];
      c[i * n + j] = accumulate ? c[i * n + j] + acc : acc;
    }
  }
}

/// C[m,n] (+)= A[m,k] * B[k,n]
template <class T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, std::span<const T> a,
             std::span<const T> b, std::span<T> c, bool accumulate) {
  assert(a.size() >= m * k && b.size() >= k * n && c.size() >= m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T acc = 0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] = accumulate ? c[i * n + j] + acc : acc;
    }
  }
}

/// C[m,n] (+)= A[k,m]^T * B[k,n]
template <class T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, std::span<const T> a,
             std::span<const T> b, std::span<T> c, bool accumulate) {
  assert(a.size() >= k * m && b.size() >= k * n && c.size() >= m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T acc = 0;
      for (std::size_t p = 0; p < k; ++p) acc += a[p * m + i] * b[p * n + j];
      c[i * n + j] = accumulate ? c[i * n + j] + acc : acc;
    }
  }
}

/// out[i] = sum_l alpha[l] * stack[l, i] for a stack of `layers` planes of
/// `plane` elements each.
template <class T, class S>
void fuse_layers(std::size_t layers, std::size_t plane, std::span<const S> stack,
                 std::span<const T> alpha, std::span<T> out) {
  assert(stack.size() >= layers * plane && alpha.size() >= layers && out.size() >= plane);
  for (std::size_t i = 0; i < plane; ++i) {
    T acc = 0;
    for (std::size_t l = 0; l < layers; ++l) acc += alpha[l] * static_cast<T>(stack[l * plane + i]);
    out[i] = acc;
  }
}

}  // namespace serial

namespace parallel {

template <class T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, std::span<const T> a,
             std::span<const T> b, std::span<T> c, bool accumulate) {
  assert(a.size() >= m * k && b.size() >= n * k && c.size() >= m * n);
  const T* pa = a.data();
  const T* pb = b.data();
  T* pc = c.data();
#pragma omp parallel for schedule(static) if (m * n * k >= kParallelWork)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(m); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const T* arow = pa + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const T* brow = pb + j * k;
      T acc = 0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      pc[i * n + j] = accumulate ? pc[i * n + j] + acc : acc;
    }
  }
}

template <class T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, std::span<const T> a,
             std::span<const T> b, std::span<T> c, bool accumulate) {
  assert(a.size() >= m * k && b.size() >= k * n && c.size() >= m * n);
  const T* pa = a.data();
  const T* pb = b.data();
  T* pc = c.data();
#pragma omp parallel if (m * n * k >= kParallelWork)
  {
    std::vector<T> row(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(m); ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      std::fill(row.begin(), row.end(), T(0));
      for (std::size_t p = 0; p < k; ++p) {
        const T aip = pa[i * k + p];
        const T* brow = pb + p * n;
        for (std::size_t j = 0; j < n; ++j) row[j] += aip * brow[j];
      }
      T* crow = pc + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] = accumulate ? crow[j] + row[j] : row[j];
    }
  }
}

template <class T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, std::span<const T> a,
             std::span<const T> b, std::span<T> c, bool accumulate) {
  assert(a.size() >= k * m && b.size() >= k * n && c.size() >= m * n);
  const T* pa = a.data();
  const T* pb = b.data();
  T* pc = c.data();
#pragma omp parallel if (m * n * k >= kParallelWork)
  {
    std::vector<T> row(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(m); ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      std::fill(row.begin(), row.end(), T(0));
      for (std::size_t p = 0; p < k; ++p) {
        const T api = pa[p * m + i];
        const T* brow = pb + p * n;
        for (std::size_t j = 0; j < n; ++j) row[j] += api * brow[j];
      }
      T* crow = pc + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] = accumulate ? crow[j] + row[j] : row[j];
    }
  }
}

template <class T, class S>
void fuse_layers(std::size_t layers, std::size_t plane, std::span<const S> stack,
                 std::span<const T> alpha, std::span<T> out) {
  assert(stack.size() >= layers * plane && alpha.size() >= layers && out.size() >= plane);
  const S* ps = stack.data();
  const T* pw = alpha.data();
  T* po = out.data();
#pragma omp parallel for schedule(static) if (layers * plane >= kParallelWork)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(plane); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    T acc = 0;
    for (std::size_t l = 0; l < layers; ++l) acc += pw[l] * static_cast<T>(ps[l * plane + i]);
    po[i] = acc;
  }
}

}  // namespace parallel

// The library calls the parallel kernels.
using parallel::fuse_layers;
using parallel::gemm_nn;
using parallel::gemm_nt;
using parallel::gemm_tn;

}  // namespace whisqa::kernels
