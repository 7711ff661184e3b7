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

#ifndef TINYSR_SIMD_KERNELS_H_
#define TINYSR_SIMD_KERNELS_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tinysr::simd {

// Arithmetic inner loops shared by the front end (windowing, filterbank,
// DCT) and the trainer/decoder (Gaussian log-likelihoods, statistics
// accumulation). Each function has a scalar reference implementation and
// optional vectorized variants; the active set is chosen once at startup
// from the CPU feature flags and can be overridden for testing.
//
// All variants must agree with the scalar reference up to floating-point
// reassociation (see tests/kernels_test.cc).
struct KernelOps {
  const char* name;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // sum_i a[i]
  double (*sum)(const double* a, std::size_t n);

  // sum_i (x[i] - m[i])^2 * iv[i]; the Mahalanobis form for diagonal
  // covariances with precomputed inverse variances.
  double (*weighted_sqdiff)(const double* x, const double* m,
                            const double* iv, std::size_t n);

  // out[i] = a[i] * b[i]
  void (*vmul)(const double* a, const double* b, double* out, std::size_t n);

  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // y[i] += alpha * x[i] * x[i]
  void (*axpy_sq)(double alpha, const double* x, double* y, std::size_t n);
};

// The scalar reference set. Always available.
const KernelOps& scalar_ops();

// The active set (scalar unless a vector backend was selected).
const KernelOps& ops();

// Backends compiled in and usable on this CPU ("scalar" first).
std::vector<std::string> available_backends();

// Select "scalar", "auto" (best available) or an explicit backend name.
// Returns false and leaves the selection unchanged if the backend is
// unknown or unusable on this CPU.
bool select_backend(std::string_view name);

}  // namespace tinysr::simd

#endif  // TINYSR_SIMD_KERNELS_H_
