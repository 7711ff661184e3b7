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

#ifndef TINYSR_FRONTEND_H_
#define TINYSR_FRONTEND_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tinysr/wav.h"

namespace tinysr {

// Front-end parameters. Defaults give 400-sample windows with a
// 160-sample hop at 16 kHz and 39-dimensional output frames
// (12 liftered cepstra + c0, with deltas and delta-deltas appended).
struct FrontendConfig {
  int sample_rate_hz = 16000;
  double preemphasis_coeff = 0.97;
  double window_ms = 25.0;
  double overlap_ms = 15.0;  // hop = window - overlap = 10 ms
  bool use_hamming = true;
  bool zero_mean_waveform = true;
  int cepstral_lifter = 22;  // 0 disables liftering
  int num_cepstra = 12;
  int num_mel_filters = 40;
  double mel_low_hz = 130.0;
  double mel_high_hz = 6800.0;
  std::size_t fft_size = 512;
  double log_energy_floor = 1e-10;
  bool cepstral_mean_norm = false;

  int window_samples() const;
  int hop_samples() const;
  int feature_dim() const { return 3 * (num_cepstra + 1); }

  // Throws BadConfig when a precondition does not hold (coefficient
  // range, fft_size vs window length, num_cepstra vs filter count).
  void validate() const;
};

struct FeatureSequence {
  std::vector<float> data;  // num_frames x dim, row-major
  int dim = 0;
  double frame_shift_ms = 10.0;
  std::string utterance_id;

  int num_frames() const {
    return dim == 0 ? 0 : static_cast<int>(data.size()) / dim;
  }
  std::span<const float> frame(int t) const {
    return {data.data() + static_cast<std::size_t>(t) * dim,
            static_cast<std::size_t>(dim)};
  }
  std::span<float> frame(int t) {
    return {data.data() + static_cast<std::size_t>(t) * dim,
            static_cast<std::size_t>(dim)};
  }
};

// Subtracts the utterance mean from the samples.
Waveform zero_mean(const Waveform& wave);

// y[n] = x[n] - coeff * x[n-1], with y[0] = x[0] * (1 - coeff) so a
// constant signal maps to a constant. coeff must be in [0, 1).
Waveform pre_emphasize(const Waveform& wave, double coeff);

// Triangular filters with unit peaks, centers equally spaced on the mel
// scale, evaluated on FFT bin frequencies.
class MelFilterbank {
 public:
  MelFilterbank(int num_filters, double low_hz, double high_hz,
                std::size_t fft_size, int sample_rate_hz);

  int num_filters() const { return static_cast<int>(filters_.size()); }
  double center_hz(int filter) const { return centers_hz_[filter]; }

  // spectrum holds fft_size/2 + 1 magnitude bins.
  std::vector<double> apply(std::span<const double> spectrum) const;

  static double hz_to_mel(double hz);
  static double mel_to_hz(double mel);

 private:
  struct Filter {
    std::size_t first_bin;
    std::vector<double> weights;
  };
  std::vector<Filter> filters_;
  std::vector<double> centers_hz_;
};

// Orthonormal DCT-II of x truncated to out_dim coefficients, and its
// inverse (DCT-III) back to in_dim values. With out_dim == x.size() the
// two are exact inverses.
std::vector<double> dct2_orthonormal(std::span<const double> x, int out_dim);
std::vector<double> idct2_orthonormal(std::span<const double> c, int in_dim);

// Sinusoidal cepstral lifter weights 1 + (L/2) sin(pi k / L) for
// k = 0..count-1. L == 0 gives all ones.
std::vector<double> lifter_weights(int lifter, int count);

// Full pipeline: optional zero-mean, pre-emphasis, framing, Hamming
// window, magnitude FFT, mel filterbank, floored log, DCT-II, liftering,
// c0 appended as the 13th static coefficient, then deltas and
// delta-deltas by +/-2-frame linear regression with edge replication.
// Throws BadSampleRate or WaveTooShort.
FeatureSequence extract_features(const Waveform& wave,
                                 const FrontendConfig& cfg);

// Feature file, binary little-endian: magic "MFT1", u32 version=1,
// u32 num_frames, u32 dim, then num_frames*dim float32 row-major.
void write_feat(const FeatureSequence& fs, const std::filesystem::path& path);
FeatureSequence read_feat(const std::filesystem::path& path);

}  // namespace tinysr

#endif  // TINYSR_FRONTEND_H_
