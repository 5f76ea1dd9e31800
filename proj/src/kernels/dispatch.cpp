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

#include <cstdlib>
#include <string_view>

#include "docctx/kernels.hpp"

namespace docctx::kernels {

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "?";
}

const KernelTable* table(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &scalar::kTable;
    case Isa::avx2:
#if defined(DOCCTX_HAVE_AVX2)
      __builtin_cpu_init();
      if (__builtin_cpu_supports("avx2")) return &avx2::kTable;
#endif
      return nullptr;
  }
  return nullptr;
}

namespace {

const KernelTable& select() {
  if (const char* env = std::getenv("DOCCTX_SIMD"); env && std::string_view(env) == "scalar") {
    return scalar::kTable;
  }
  if (const KernelTable* t = table(Isa::avx2)) return *t;
  return scalar::kTable;
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& chosen = select();
  return chosen;
}

}  // namespace docctx::kernels
