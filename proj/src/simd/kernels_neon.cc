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

// NEON variants for aarch64, where 128-bit SIMD is baseline.

#include "tinysr/simd/kernels.h"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace tinysr::simd {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return vaddvq_f64(acc) + tail;
}

double sum_neon(const double* a, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(a + i));
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i];
  return vaddvq_f64(acc) + tail;
}

double weighted_sqdiff_neon(const double* x, const double* m,
                            const double* iv, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(x + i), vld1q_f64(m + i));
    acc = vfmaq_f64(acc, vmulq_f64(d, d), vld1q_f64(iv + i));
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    const double d = x[i] - m[i];
    tail += d * d * iv[i];
  }
  return vaddvq_f64(acc) + tail;
}

void vmul_neon(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void axpy_sq_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vx = vld1q_f64(x + i);
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), vmulq_f64(va, vx), vx));
  }
  for (; i < n; ++i) y[i] += alpha * x[i] * x[i];
}

}  // namespace

const KernelOps* neon_ops() {
  static const KernelOps kOps = {
      "neon",    dot_neon,  sum_neon, weighted_sqdiff_neon,
      vmul_neon, axpy_neon, axpy_sq_neon,
  };
  return &kOps;
}

}  // namespace tinysr::simd

#endif  // aarch64
