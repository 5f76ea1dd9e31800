// Copyright 2026 The docctx Authors.
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

#include "docctx/kernels.hpp"

#include <immintrin.h>

// Built with -mavx2 (no FMA, so products are rounded exactly like the scalar
// reference). Only reached after a CPUID check.

namespace docctx::kernels::avx2 {
namespace {

void bm25_term_weights(std::span<const double> tf, std::span<const double> len_norm, double idf,
                       double k1, std::span<double> out) {
  const std::size_t n = tf.size();
  const double k1p1 = k1 + 1.0;
  const __m256d vk1p1 = _mm256_set1_pd(k1p1);
  const __m256d vidf = _mm256_set1_pd(idf);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_loadu_pd(tf.data() + i);
    const __m256d l = _mm256_loadu_pd(len_norm.data() + i);
    const __m256d num = _mm256_mul_pd(t, vk1p1);
    const __m256d den = _mm256_add_pd(t, l);
    _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(vidf, _mm256_div_pd(num, den)));
  }
  for (; i < n; ++i) {
    const double num = tf[i] * k1p1;
    const double den = tf[i] + len_norm[i];
    out[i] = idf * (num / den);
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a.data() + i),
                                             _mm256_loadu_pd(b.data() + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a.data() + i + 4),
                                             _mm256_loadu_pd(b.data() + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a.data() + i),
                                             _mm256_loadu_pd(b.data() + i)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x.data() + i));
    _mm256_storeu_pd(y.data() + i, _mm256_add_pd(_mm256_loadu_pd(y.data() + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable kTable{Isa::avx2, &bm25_term_weights, &dot, &axpy};

}  // namespace docctx::kernels::avx2
