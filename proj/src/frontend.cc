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

#include "tinysr/frontend.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "tinysr/errors.h"
#include "tinysr/fft.h"
#include "tinysr/simd/kernels.h"

namespace tinysr {

int FrontendConfig::window_samples() const {
  return static_cast<int>(std::lround(sample_rate_hz * window_ms / 1000.0));
}

int FrontendConfig::hop_samples() const {
  return static_cast<int>(
      std::lround(sample_rate_hz * (window_ms - overlap_ms) / 1000.0));
}

void FrontendConfig::validate() const {
  if (sample_rate_hz <= 0) throw BadConfig("sample_rate_hz must be positive");
  if (preemphasis_coeff < 0.0 || preemphasis_coeff >= 1.0)
    throw BadConfig("preemphasis_coeff must be in [0, 1)");
  if (window_samples() <= 0 || hop_samples() <= 0)
    throw BadConfig("window/overlap durations give a non-positive frame step");
  if (fft_size == 0 || (fft_size & (fft_size - 1)) != 0)
    throw BadConfig("fft_size must be a power of two");
  if (fft_size < static_cast<std::size_t>(window_samples()))
    throw BadConfig("fft_size must be >= window length in samples");
  if (num_cepstra >= num_mel_filters)
    throw BadConfig("num_cepstra must be < num_mel_filters");
  if (num_cepstra < 1) throw BadConfig("num_cepstra must be >= 1");
  if (mel_low_hz < 0.0 || mel_high_hz <= mel_low_hz ||
      mel_high_hz > sample_rate_hz / 2.0)
    throw BadConfig("mel band edges must satisfy 0 <= low < high <= nyquist");
  if (log_energy_floor <= 0.0)
    throw BadConfig("log_energy_floor must be positive");
  if (cepstral_lifter < 0) throw BadConfig("cepstral_lifter must be >= 0");
}

Waveform zero_mean(const Waveform& wave) {
  Waveform out = wave;
  if (out.samples.empty()) return out;
  const double mean =
      simd::ops().sum(out.samples.data(), out.samples.size()) /
      static_cast<double>(out.samples.size());
  for (double& s : out.samples) s -= mean;
  return out;
}

Waveform pre_emphasize(const Waveform& wave, double coeff) {
  Waveform out = wave;
  const std::size_t n = wave.samples.size();
  if (n == 0) return out;
  for (std::size_t i = n - 1; i > 0; --i) {
    out.samples[i] = wave.samples[i] - coeff * wave.samples[i - 1];
  }
  out.samples[0] = wave.samples[0] * (1.0 - coeff);
  return out;
}

double MelFilterbank::hz_to_mel(double hz) {
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double MelFilterbank::mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelFilterbank::MelFilterbank(int num_filters, double low_hz, double high_hz,
                             std::size_t fft_size, int sample_rate_hz) {
  const double mel_low = hz_to_mel(low_hz);
  const double mel_high = hz_to_mel(high_hz);
  // num_filters + 2 equally spaced edge points on the mel scale.
  std::vector<double> edges_hz(num_filters + 2);
  for (int i = 0; i < num_filters + 2; ++i) {
    const double mel =
        mel_low + (mel_high - mel_low) * i / (num_filters + 1.0);
    edges_hz[i] = mel_to_hz(mel);
  }
  const double bin_hz = static_cast<double>(sample_rate_hz) /
                        static_cast<double>(fft_size);
  const std::size_t num_bins = fft_size / 2 + 1;
  filters_.resize(num_filters);
  centers_hz_.resize(num_filters);
  for (int f = 0; f < num_filters; ++f) {
    const double left = edges_hz[f];
    const double center = edges_hz[f + 1];
    const double right = edges_hz[f + 2];
    centers_hz_[f] = center;
    Filter& filt = filters_[f];
    filt.first_bin = num_bins;
    for (std::size_t k = 0; k < num_bins; ++k) {
      const double hz = bin_hz * static_cast<double>(k);
      double w = 0.0;
      if (hz > left && hz < right) {
        w = hz <= center ? (hz - left) / (center - left)
                         : (right - hz) / (right - center);
      }
      if (w > 0.0) {
        if (filt.weights.empty()) filt.first_bin = k;
        filt.weights.push_back(w);
      } else if (!filt.weights.empty()) {
        break;  // triangles are contiguous in frequency
      }
    }
  }
}

std::vector<double> MelFilterbank::apply(
    std::span<const double> spectrum) const {
  std::vector<double> out(filters_.size());
  for (std::size_t f = 0; f < filters_.size(); ++f) {
    const Filter& filt = filters_[f];
    out[f] = filt.weights.empty()
                 ? 0.0
                 : simd::ops().dot(spectrum.data() + filt.first_bin,
                                   filt.weights.data(), filt.weights.size());
  }
  return out;
}

std::vector<double> dct2_orthonormal(std::span<const double> x, int out_dim) {
  const int n = static_cast<int>(x.size());
  std::vector<double> out(out_dim);
  const double scale0 = std::sqrt(1.0 / n);
  const double scale = std::sqrt(2.0 / n);
  for (int k = 0; k < out_dim; ++k) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      acc += x[j] * std::cos(M_PI * k * (j + 0.5) / n);
    }
    out[k] = acc * (k == 0 ? scale0 : scale);
  }
  return out;
}

std::vector<double> idct2_orthonormal(std::span<const double> c, int in_dim) {
  const int n = in_dim;
  const double scale0 = std::sqrt(1.0 / n);
  const double scale = std::sqrt(2.0 / n);
  std::vector<double> out(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      const double s = (k == 0 ? scale0 : scale);
      acc += s * c[k] * std::cos(M_PI * k * (j + 0.5) / n);
    }
    out[j] = acc;
  }
  return out;
}

std::vector<double> lifter_weights(int lifter, int count) {
  std::vector<double> w(count, 1.0);
  if (lifter == 0) return w;
  for (int k = 0; k < count; ++k) {
    w[k] = 1.0 + 0.5 * lifter * std::sin(M_PI * k / lifter);
  }
  return w;
}

namespace {

// Delta by linear regression over +/-2 frames with edge replication:
// d[t] = sum_th th * (x[t+th] - x[t-th]) / (2 * sum_th th^2).
void append_deltas(std::vector<std::vector<double>>& rows, int src_begin,
                   int src_dim) {
  const int num_frames = static_cast<int>(rows.size());
  constexpr int kWindow = 2;
  constexpr double kDenom = 10.0;  // 2 * (1^2 + 2^2)
  std::vector<std::vector<double>> deltas(
      num_frames, std::vector<double>(src_dim, 0.0));
  for (int t = 0; t < num_frames; ++t) {
    for (int th = 1; th <= kWindow; ++th) {
      const int lo = std::max(0, t - th);
      const int hi = std::min(num_frames - 1, t + th);
      for (int d = 0; d < src_dim; ++d) {
        deltas[t][d] +=
            th * (rows[hi][src_begin + d] - rows[lo][src_begin + d]);
      }
    }
    for (int d = 0; d < src_dim; ++d) deltas[t][d] /= kDenom;
  }
  for (int t = 0; t < num_frames; ++t) {
    rows[t].insert(rows[t].end(), deltas[t].begin(), deltas[t].end());
  }
}

}  // namespace

FeatureSequence extract_features(const Waveform& wave,
                                 const FrontendConfig& cfg) {
  cfg.validate();
  if (wave.sample_rate != cfg.sample_rate_hz) {
    throw BadSampleRate(wave.source_id + ": sample rate " +
                        std::to_string(wave.sample_rate) + ", expected " +
                        std::to_string(cfg.sample_rate_hz));
  }
  const int win = cfg.window_samples();
  const int hop = cfg.hop_samples();
  if (static_cast<int>(wave.samples.size()) < win) {
    throw WaveTooShort(wave.source_id + ": " +
                       std::to_string(wave.samples.size()) +
                       " samples, need at least " + std::to_string(win));
  }

  Waveform processed = cfg.zero_mean_waveform ? zero_mean(wave) : wave;
  processed = pre_emphasize(processed, cfg.preemphasis_coeff);

  const int num_frames =
      (static_cast<int>(processed.samples.size()) - win) / hop + 1;

  std::vector<double> window(win, 1.0);
  if (cfg.use_hamming) {
    for (int i = 0; i < win; ++i) {
      window[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (win - 1));
    }
  }

  const MelFilterbank filterbank(cfg.num_mel_filters, cfg.mel_low_hz,
                                 cfg.mel_high_hz, cfg.fft_size,
                                 cfg.sample_rate_hz);
  const std::vector<double> lifter =
      lifter_weights(cfg.cepstral_lifter, cfg.num_cepstra + 1);

  const int num_static = cfg.num_cepstra + 1;
  std::vector<std::vector<double>> rows(num_frames);
  std::vector<double> frame(win);
  for (int t = 0; t < num_frames; ++t) {
    simd::ops().vmul(processed.samples.data() +
                         static_cast<std::size_t>(t) * hop,
                     window.data(), frame.data(), win);
    const std::vector<double> spectrum =
        magnitude_spectrum(frame, cfg.fft_size);
    std::vector<double> mel = filterbank.apply(spectrum);
    for (double& e : mel) e = std::log(std::max(e, cfg.log_energy_floor));
    const std::vector<double> cep =
        dct2_orthonormal(mel, cfg.num_cepstra + 1);
    // Statics are c1..c12 liftered, then c0 appended.
    std::vector<double>& row = rows[t];
    row.resize(num_static);
    for (int k = 1; k <= cfg.num_cepstra; ++k) row[k - 1] = lifter[k] * cep[k];
    row[cfg.num_cepstra] = cep[0];
  }

  if (cfg.cepstral_mean_norm && num_frames > 0) {
    std::vector<double> mean(num_static, 0.0);
    for (const auto& row : rows)
      for (int d = 0; d < num_static; ++d) mean[d] += row[d];
    for (double& m : mean) m /= num_frames;
    for (auto& row : rows)
      for (int d = 0; d < num_static; ++d) row[d] -= mean[d];
  }

  append_deltas(rows, 0, num_static);           // deltas
  append_deltas(rows, num_static, num_static);  // delta-deltas

  FeatureSequence fs;
  fs.dim = 3 * num_static;
  fs.utterance_id = wave.source_id;
  fs.frame_shift_ms = cfg.window_ms - cfg.overlap_ms;
  fs.data.reserve(static_cast<std::size_t>(num_frames) * fs.dim);
  for (const auto& row : rows) {
    for (double v : row) fs.data.push_back(static_cast<float>(v));
  }
  return fs;
}

namespace {

constexpr char kFeatMagic[4] = {'M', 'F', 'T', '1'};
constexpr std::uint32_t kFeatVersion = 1;

void put_u32(std::ofstream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint32_t get_u32(std::ifstream& in, const std::string& path,
                      const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw CorruptFeatFile(path + ": truncated " + what);
  }
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_feat(const FeatureSequence& fs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kFeatMagic, 4);
  put_u32(out, kFeatVersion);
  put_u32(out, static_cast<std::uint32_t>(fs.num_frames()));
  put_u32(out, static_cast<std::uint32_t>(fs.dim));
  static_assert(sizeof(float) == 4);
  out.write(reinterpret_cast<const char*>(fs.data.data()),
            static_cast<std::streamsize>(fs.data.size() * sizeof(float)));
  if (!out) throw Error("write failed for " + path.string());
}

FeatureSequence read_feat(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptFeatFile(path.string() + ": cannot open file");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kFeatMagic, 4) != 0) {
    throw CorruptFeatFile(path.string() + ": bad magic");
  }
  const std::uint32_t version = get_u32(in, path.string(), "version");
  if (version != kFeatVersion) {
    throw CorruptFeatFile(path.string() + ": unsupported version " +
                          std::to_string(version));
  }
  const std::uint32_t num_frames = get_u32(in, path.string(), "frame count");
  const std::uint32_t dim = get_u32(in, path.string(), "dimension");
  if (num_frames > 0 && dim == 0) {
    throw CorruptFeatFile(path.string() + ": zero dimension with frames");
  }
  FeatureSequence fs;
  fs.dim = static_cast<int>(dim);
  fs.utterance_id = path.stem().string();
  fs.data.resize(static_cast<std::size_t>(num_frames) * dim);
  if (!fs.data.empty() &&
      !in.read(reinterpret_cast<char*>(fs.data.data()),
               static_cast<std::streamsize>(fs.data.size() * sizeof(float)))) {
    throw CorruptFeatFile(path.string() + ": truncated frame data");
  }
  // A well-formed file ends exactly after the payload.
  char extra;
  if (in.read(&extra, 1)) {
    throw CorruptFeatFile(path.string() + ": trailing bytes after frame data");
  }
  for (float v : fs.data) {
    if (!std::isfinite(v)) {
      throw CorruptFeatFile(path.string() + ": non-finite feature value");
    }
  }
  return fs;
}

}  // namespace tinysr
