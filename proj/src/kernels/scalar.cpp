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

namespace docctx::kernels::scalar {
namespace {

void bm25_term_weights(std::span<const double> tf, std::span<const double> len_norm, double idf,
                       double k1, std::span<double> out) {
  const double k1p1 = k1 + 1.0;
  for (std::size_t i = 0; i < tf.size(); ++i) {
    const double num = tf[i] * k1p1;
    const double den = tf[i] + len_norm[i];
    out[i] = idf * (num / den);
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable kTable{Isa::scalar, &bm25_term_weights, &dot, &axpy};

}  // namespace docctx::kernels::scalar
