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

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "docctx/kernels.hpp"
#include "docctx/rng.hpp"

using namespace docctx;
namespace k = docctx::kernels;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = lo + (hi - lo) * rng.uniform_real();
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar table is always available and active() is usable") {
  REQUIRE(k::table(k::Isa::scalar) != nullptr);
  const auto& t = k::active();
  CHECK((t.isa == k::Isa::scalar || t.isa == k::Isa::avx2));
  MESSAGE("active kernels: ", k::name(t.isa));
}

TEST_CASE("scalar bm25 weights match the formula") {
  std::vector<double> tf{1, 2, 3}, norm{1.5, 0.75, 2.25}, out(3);
  k::scalar::kTable.bm25_term_weights(tf, norm, 0.7, 1.5, out);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(out[i] == doctest::Approx(0.7 * tf[i] * 2.5 / (tf[i] + norm[i])).epsilon(1e-15));
  }
}

TEST_CASE("vector variants agree with the scalar reference") {
  const auto* v = k::table(k::Isa::avx2);
  if (v == nullptr) {
    MESSAGE("AVX2 not available on this host; equivalence not exercised");
    return;
  }
  const auto& s = k::scalar::kTable;
  Rng rng(1234);
  for (std::size_t n = 0; n < 67; ++n) {
    auto tf = random_vec(rng, n, 1, 9);
    for (auto& x : tf) x = std::floor(x);
    auto norm = random_vec(rng, n, 0.1, 4.0);
    const double idf = rng.uniform_real() * 5;
    std::vector<double> a(n), b(n);
    s.bm25_term_weights(tf, norm, idf, 1.2, a);
    v->bm25_term_weights(tf, norm, idf, 1.2, b);
    CHECK_MESSAGE(bitwise_equal(a, b), "bm25 n=", n);

    auto x = random_vec(rng, n, -3, 3);
    auto y = random_vec(rng, n, -3, 3);
    const double ds = s.dot(x, y);
    const double dv = v->dot(x, y);
    double mag = 0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(x[i] * y[i]);
    CHECK_MESSAGE(std::abs(ds - dv) <= 1e-13 * (1 + mag), "dot n=", n);

    auto y1 = y, y2 = y;
    s.axpy(-0.37, x, y1);
    v->axpy(-0.37, x, y2);
    CHECK_MESSAGE(bitwise_equal(y1, y2), "axpy n=", n);
  }
}
