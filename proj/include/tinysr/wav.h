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

#ifndef TINYSR_WAV_H_
#define TINYSR_WAV_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tinysr {

struct Waveform {
  // Amplitudes scaled to [-1, 1) from signed 16-bit PCM.
  std::vector<double> samples;
  int sample_rate = 0;
  std::string source_id;
};

// Reads a RIFF/PCM wav file: 16-bit mono only. Any other encoding is
// rejected with a BadWavFormat naming the offending field. The sample
// rate is returned as read; callers enforce the pipeline rate.
Waveform read_wav(const std::filesystem::path& path);

// Writes samples (clipped to [-1, 1)) as 16-bit mono PCM.
void write_wav_pcm16(const std::filesystem::path& path,
                     std::span<const double> samples, int sample_rate);

}  // namespace tinysr

#endif  // TINYSR_WAV_H_
