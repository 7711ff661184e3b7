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

#ifndef TINYSR_FFT_H_
#define TINYSR_FFT_H_

#include <cstddef>
#include <span>
#include <vector>

namespace tinysr {

// In-place iterative radix-2 complex FFT. re/im must have the same
// power-of-two size. inverse=true applies the unnormalized inverse
// transform followed by division by n.
void fft_complex(std::span<double> re, std::span<double> im,
                 bool inverse = false);

// Magnitude spectrum (fft_size/2 + 1 bins) of a real frame zero-padded to
// fft_size. fft_size must be a power of two >= frame.size().
std::vector<double> magnitude_spectrum(std::span<const double> frame,
                                       std::size_t fft_size);

}  // namespace tinysr

#endif  // TINYSR_FFT_H_
