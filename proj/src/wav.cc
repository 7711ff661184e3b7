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

#include "tinysr/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "tinysr/errors.h"

namespace tinysr {
namespace {

std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] |
                                    (static_cast<std::uint16_t>(p[1]) << 8));
}

void put_u32le(std::string& s, std::uint32_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16le(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BadWavFormat(path.string() + ": cannot open file");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();

  auto fail = [&](const std::string& field, const std::string& detail) {
    throw BadWavFormat(path.string() + ": bad " + field + " (" + detail + ")");
  };

  if (size < 12) fail("riff header", "file shorter than 12 bytes");
  if (std::memcmp(p, "RIFF", 4) != 0) fail("chunk id", "expected RIFF");
  if (std::memcmp(p + 8, "WAVE", 4) != 0) fail("format id", "expected WAVE");

  bool have_fmt = false;
  std::uint16_t audio_format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t off = 12;
  while (off + 8 <= size) {
    const char* id = reinterpret_cast<const char*>(p + off);
    const std::uint32_t len = read_u32le(p + off + 4);
    const std::size_t body = off + 8;
    if (body + len > size) fail("chunk size", "chunk extends past end of file");
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (len < 16) fail("fmt chunk", "shorter than 16 bytes");
      audio_format = read_u16le(p + body);
      channels = read_u16le(p + body + 2);
      rate = read_u32le(p + body + 4);
      bits = read_u16le(p + body + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = p + body;
      data_len = len;
    }
    off = body + len + (len & 1);  // chunks are word-aligned
  }

  if (!have_fmt) fail("fmt chunk", "missing");
  if (audio_format != 1)
    fail("audio_format", "expected 1 (PCM), got " +
                             std::to_string(audio_format));
  if (channels != 1)
    fail("channels", "expected 1 (mono), got " + std::to_string(channels));
  if (bits != 16)
    fail("bits_per_sample", "expected 16, got " + std::to_string(bits));
  if (data == nullptr) fail("data chunk", "missing");

  Waveform wave;
  wave.sample_rate = static_cast<int>(rate);
  wave.source_id = path.stem().string();
  const std::size_t n = data_len / 2;
  wave.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int16_t s =
        static_cast<std::int16_t>(read_u16le(data + 2 * i));
    wave.samples[i] = static_cast<double>(s) / 32768.0;
  }
  return wave;
}

void write_wav_pcm16(const std::filesystem::path& path,
                     std::span<const double> samples, int sample_rate) {
  const std::uint32_t data_len = static_cast<std::uint32_t>(samples.size() * 2);
  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  put_u32le(out, 36 + data_len);
  out += "WAVE";
  out += "fmt ";
  put_u32le(out, 16);
  put_u16le(out, 1);  // PCM
  put_u16le(out, 1);  // mono
  put_u32le(out, static_cast<std::uint32_t>(sample_rate));
  put_u32le(out, static_cast<std::uint32_t>(sample_rate * 2));  // byte rate
  put_u16le(out, 2);   // block align
  put_u16le(out, 16);  // bits per sample
  out += "data";
  put_u32le(out, data_len);
  for (double v : samples) {
    const double clipped = std::clamp(v, -1.0, 32767.0 / 32768.0);
    const auto s = static_cast<std::int16_t>(std::lrint(clipped * 32768.0));
    put_u16le(out, static_cast<std::uint16_t>(s));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace tinysr
