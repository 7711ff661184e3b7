// Copyright 2026 The tinysr Authors.
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

#include "tinysr/simd/kernels.h"

namespace tinysr::simd {

#if defined(__x86_64__) || defined(_M_X64)
const KernelOps* avx2_ops();  // kernels_avx2.cc
#endif
#if defined(__aarch64__)
const KernelOps* neon_ops();  // kernels_neon.cc
#endif

namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::vector<const KernelOps*> usable_backends() {
  std::vector<const KernelOps*> out;
  out.push_back(&scalar_ops());
#if defined(__x86_64__) || defined(_M_X64)
  if (cpu_has_avx2_fma()) out.push_back(avx2_ops());
#endif
#if defined(__aarch64__)
  out.push_back(neon_ops());
#endif
  return out;
}

// The active set defaults to the best usable backend.
const KernelOps* g_active = nullptr;

const KernelOps* best_backend() {
  const auto all = usable_backends();
  return all.back();
}

}  // namespace

const KernelOps& ops() {
  if (g_active == nullptr) g_active = best_backend();
  return *g_active;
}

std::vector<std::string> available_backends() {
  std::vector<std::string> names;
  for (const KernelOps* k : usable_backends()) names.emplace_back(k->name);
  return names;
}

bool select_backend(std::string_view name) {
  if (name == "auto") {
    g_active = best_backend();
    return true;
  }
  for (const KernelOps* k : usable_backends()) {
    if (name == k->name) {
      g_active = k;
      return true;
    }
  }
  return false;
}

}  // namespace tinysr::simd
