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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "tinysr/rng.h"
#include "tinysr/simd/kernels.h"

using tinysr::Rng;
namespace simd = tinysr::simd;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

// Tolerance scaled by the magnitude of the summed terms: vector
// backends reassociate, so results differ by a few ulps per element.
void check_close(double a, double b, double magnitude) {
  const double tol = 1e-12 * (magnitude + 1.0);
  CHECK(std::abs(a - b) <= tol);
}

}  // namespace

TEST_CASE("every available backend matches the scalar reference") {
  const simd::KernelOps& ref = simd::scalar_ops();
  for (const std::string& backend : simd::available_backends()) {
    CAPTURE(backend);
    REQUIRE(simd::select_backend(backend));
    const simd::KernelOps& ops = simd::ops();
    Rng rng(42);
    // sizes around the vector width, the feature dim, and bigger blocks
    for (const std::size_t n :
         {std::size_t{1}, std::size_t{2}, std::size_t{3}, std::size_t{4},
          std::size_t{5}, std::size_t{7}, std::size_t{8}, std::size_t{13},
          std::size_t{39}, std::size_t{40}, std::size_t{257},
          std::size_t{400}, std::size_t{512}}) {
      CAPTURE(n);
      const auto a = random_vector(rng, n, 3.0);
      const auto b = random_vector(rng, n, 2.0);
      std::vector<double> iv(n);
      for (auto& x : iv) x = 0.1 + 10.0 * rng.uniform();

      double mag = 0.0;
      for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
      check_close(ops.dot(a.data(), b.data(), n),
                  ref.dot(a.data(), b.data(), n), mag);

      mag = 0.0;
      for (double x : a) mag += std::abs(x);
      check_close(ops.sum(a.data(), n), ref.sum(a.data(), n), mag);

      mag = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        mag += (a[i] - b[i]) * (a[i] - b[i]) * iv[i];
      }
      check_close(ops.weighted_sqdiff(a.data(), b.data(), iv.data(), n),
                  ref.weighted_sqdiff(a.data(), b.data(), iv.data(), n), mag);

      std::vector<double> out_ops(n), out_ref(n);
      ops.vmul(a.data(), b.data(), out_ops.data(), n);
      ref.vmul(a.data(), b.data(), out_ref.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(out_ops[i] == out_ref[i]);

      const double alpha = rng.normal();
      std::vector<double> y_ops = b, y_ref = b;
      ops.axpy(alpha, a.data(), y_ops.data(), n);
      ref.axpy(alpha, a.data(), y_ref.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        check_close(y_ops[i], y_ref[i], std::abs(alpha * a[i]) + std::abs(b[i]));
      }

      y_ops = b;
      y_ref = b;
      ops.axpy_sq(alpha, a.data(), y_ops.data(), n);
      ref.axpy_sq(alpha, a.data(), y_ref.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        check_close(y_ops[i], y_ref[i],
                    std::abs(alpha * a[i] * a[i]) + std::abs(b[i]));
      }
    }
  }
  simd::select_backend("auto");
}

TEST_CASE("backend selection") {
  const auto backends = simd::available_backends();
  REQUIRE(!backends.empty());
  CHECK(backends.front() == "scalar");
  CHECK(simd::select_backend("scalar"));
  CHECK(std::string(simd::ops().name) == "scalar");
  CHECK_FALSE(simd::select_backend("no-such-backend"));
  CHECK(std::string(simd::ops().name) == "scalar");  // unchanged on failure
  CHECK(simd::select_backend("auto"));
  CHECK(std::string(simd::ops().name) == backends.back());
}
