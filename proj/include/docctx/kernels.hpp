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

#pragma once

#include <span>
#include <string_view>

// Arithmetic inner loops with a scalar reference and vector variants chosen
// once at startup from the host CPU. Setting DOCCTX_SIMD=scalar forces the
// reference path.
//
// bm25_term_weights evaluates the same operation sequence in every variant,
// so results are bit-identical. dot() reassociates the sum and only agrees
// with the reference to rounding.

namespace docctx::kernels {

enum class Isa { scalar, avx2 };

std::string_view name(Isa isa);

struct KernelTable {
  Isa isa;
  // out[i] = idf * ((tf[i] * (k1 + 1)) / (tf[i] + len_norm[i]))
  void (*bm25_term_weights)(std::span<const double> tf, std::span<const double> len_norm,
                            double idf, double k1, std::span<double> out);
  double (*dot)(std::span<const double> a, std::span<const double> b);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, std::span<const double> x, std::span<double> y);
};

// nullptr when the variant is not compiled in or the CPU lacks it.
const KernelTable* table(Isa isa);
const KernelTable& active();

inline void bm25_term_weights(std::span<const double> tf, std::span<const double> len_norm,
                              double idf, double k1, std::span<double> out) {
  active().bm25_term_weights(tf, len_norm, idf, k1, out);
}
inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a, b);
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x, y);
}

namespace scalar {
extern const KernelTable kTable;
}
namespace avx2 {
// Defined only on x86-64 builds.
extern const KernelTable kTable;
}

}  // namespace docctx::kernels
