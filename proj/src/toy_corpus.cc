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

#include "tinysr/toy_corpus.h"

#include <cmath>
#include <fstream>
#include <map>
#include <vector>

#include "tinysr/corpus.h"
#include "tinysr/errors.h"
#include "tinysr/rng.h"
#include "tinysr/wav.h"

namespace tinysr {
namespace {

constexpr int kRate = 16000;
constexpr int kHop = 160;

struct PhoneSound {
  double freq;        // fundamental of the two-tone stack
  double noise;       // extra noise on top of the speaker floor
  bool tonal = true;
};

// Distinct tone stacks inside the 130-6800 Hz mel band. Words share
// phones so single-Gaussian models confuse near words.
const std::map<std::string, PhoneSound>& phone_sounds() {
  static const std::map<std::string, PhoneSound> kSounds = {
      {"K", {500.0, 0.010}},  {"T", {1400.0, 0.010}}, {"M", {2500.0, 0.010}},
      {"A", {850.0, 0.010}},  {"O", {1900.0, 0.010}}, {"I", {3300.0, 0.010}},
      {"FP", {210.0, 0.060}}, {"BR", {5200.0, 0.090, false}},
      {"SIL", {0.0, 0.0, false}},
  };
  return kSounds;
}

const std::vector<std::pair<std::string, std::vector<std::string>>>& words() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>>
      kWords = {
          {"KA", {"K", "A"}}, {"KO", {"K", "O"}}, {"MI", {"M", "I"}},
          {"TA", {"T", "A"}}, {"TO", {"T", "O"}},
      };
  return kWords;
}

struct Speaker {
  std::string code;
  double gain;
  double freq_factor;
  double noise;
};

// Two variant modes per phone instance keep the per-state distribution
// bimodal, which is what the mixture-growth stages are meant to absorb.
struct Variant {
  double freq_mult;
  double amp_hi;
};

void synth_phone(const std::string& phone, int num_frames,
                 const Speaker& speaker, Rng& rng,
                 std::vector<double>& samples) {
  const PhoneSound& sound = phone_sounds().at(phone);
  const int n = num_frames * kHop;
  const std::size_t start = samples.size();
  samples.resize(start + n, 0.0);

  if (phone == "SIL") {
    for (int i = 0; i < n; ++i) {
      samples[start + i] = speaker.noise * rng.normal();
    }
    return;
  }

  const Variant variant = rng.bernoulli(0.5) ? Variant{0.93, 0.75}
                                             : Variant{1.08, 0.52};
  const double f1 = sound.freq * variant.freq_mult * speaker.freq_factor;
  const double f2 = 2.3 * f1;
  const double phase1 = rng.uniform(0.0, 2.0 * M_PI);
  const double phase2 = rng.uniform(0.0, 2.0 * M_PI);
  const double amp = speaker.gain * rng.uniform(0.85, 1.0);
  const double noise = speaker.noise + sound.noise;
  const int ramp = 64;  // raised-cosine edges against spectral clicks

  for (int i = 0; i < n; ++i) {
    double env = 1.0;
    if (i < ramp) env = 0.5 - 0.5 * std::cos(M_PI * i / ramp);
    if (n - 1 - i < ramp) {
      env = std::min(env, 0.5 - 0.5 * std::cos(M_PI * (n - 1 - i) / ramp));
    }
    double v = noise * rng.normal();
    if (sound.tonal) {
      const double t = static_cast<double>(i) / kRate;
      v += amp * env *
           (variant.amp_hi * std::sin(2.0 * M_PI * f1 * t + phase1) +
            (1.0 - variant.amp_hi) * std::sin(2.0 * M_PI * f2 * t + phase2));
    } else {
      // hiss: modulated noise burst with a weak tone
      const double t = static_cast<double>(i) / kRate;
      v += amp * env *
           (0.45 * rng.normal() +
            0.15 * std::sin(2.0 * M_PI * sound.freq * t + phase1));
    }
    samples[start + i] = 0.55 * v;
  }
}

// Markov chain over the 5 words; structured so higher-order models fit
// the text better than unigrams.
int next_word(int prev, Rng& rng) {
  const int n = static_cast<int>(words().size());
  std::vector<double> weights(n);
  for (int j = 0; j < n; ++j) {
    double w = 1.0;
    if (prev >= 0) {
      if (j == (prev + 1) % n) w += 3.0;
      if (j == (prev + 3) % n) w += 1.5;
    } else {
      w += (n - j) * 0.4;
    }
    weights[j] = w;
  }
  return rng.categorical(weights);
}

struct GeneratedUtterance {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<double> samples;
};

GeneratedUtterance generate_utterance(const Speaker& speaker, int index,
                                      Rng& rng) {
  GeneratedUtterance utt;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%04d", speaker.code.c_str(), index);
  utt.id = buf;

  const int num_words = rng.uniform_int(3, 7);
  synth_phone("SIL", rng.uniform_int(8, 14), speaker, rng, utt.samples);
  int prev = -1;
  for (int w = 0; w < num_words; ++w) {
    if (w > 0) {
      if (rng.bernoulli(0.08)) {
        const std::string filler = rng.bernoulli(0.7) ? "FP" : "BR";
        utt.tokens.push_back("++" + filler + "++");
        synth_phone(filler, rng.uniform_int(8, 16), speaker, rng, utt.samples);
      }
      if (rng.bernoulli(0.35)) {
        synth_phone("SIL", rng.uniform_int(3, 6), speaker, rng, utt.samples);
      }
    }
    const int word = next_word(prev, rng);
    prev = word;
    utt.tokens.push_back(words()[word].first);
    for (const auto& phone : words()[word].second) {
      synth_phone(phone, rng.uniform_int(7, 13), speaker, rng, utt.samples);
    }
  }
  synth_phone("SIL", rng.uniform_int(8, 14), speaker, rng, utt.samples);
  // tail pad so the last hop still fills a full analysis window
  utt.samples.resize(utt.samples.size() + 240, 0.0);
  return utt;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string config_text(const std::string& name) {
  std::string cfg;
  cfg += "# generated by make-toy-corpus\n";
  cfg += "corpus_name = " + name + "\n";
  cfg += "etc_dir = etc\n";
  cfg += "wavfiles_dir = wav\n";
  cfg += "feat_dir = feat\n";
  cfg += "model_dir = model\n";
  cfg += "result_dir = result\n";
  cfg += "wavfile_srate = 16000.0\n";
  cfg += "hmm_type = continuous\n";
  cfg += "\n";
  cfg += "mixture_schedule = 1,2,4,8\n";
  cfg += "cd_enabled = true\n";
  cfg += "cd_min_count = 8\n";
  cfg += "iterations_per_stage = 8\n";
  cfg += "convergence_threshold = 1e-4\n";
  cfg += "\n";
  cfg += "lm_order = 3\n";
  cfg += "lm_smoothing = laplace\n";
  cfg += "\n";
  cfg += "beam = 200\n";
  cfg += "language_weight = 6.5\n";
  cfg += "word_insertion_penalty = 0\n";
  cfg += "filler_insertion_penalty = -2\n";
  return cfg;
}

}  // namespace

void make_toy_corpus(const ToyCorpusOptions& options) {
  if (options.num_train < 1 || options.num_test < 1) {
    throw BadConfig("toy corpus needs at least one train and test utterance");
  }
  Rng rng(options.seed);

  const std::vector<std::string> train_codes = {"spA", "spB", "spC",
                                                "spD", "spE", "spF"};
  const std::vector<std::string> test_codes = {"spG", "spH"};
  std::map<std::string, Speaker> speakers;
  for (const auto& code : train_codes) {
    speakers[code] = {code, rng.uniform(0.45, 0.9), rng.uniform(0.97, 1.03),
                      rng.uniform(0.012, 0.03)};
  }
  for (const auto& code : test_codes) {
    speakers[code] = {code, rng.uniform(0.45, 0.9), rng.uniform(0.97, 1.03),
                      rng.uniform(0.012, 0.03)};
  }

  const auto etc = options.out_dir / "etc";
  const auto wav = options.out_dir / "wav";
  std::filesystem::create_directories(etc);

  std::string phone_text = "SIL\n";
  for (const auto& [phone, sound] : phone_sounds()) {
    (void)sound;
    if (phone != "SIL") phone_text += phone + "\n";
  }
  write_text(etc / (options.name + ".phone"), phone_text);

  std::string dic_text;
  for (const auto& [word, phones] : words()) {
    dic_text += word;
    for (const auto& p : phones) dic_text += " " + p;
    dic_text += "\n";
  }
  write_text(etc / (options.name + ".dic"), dic_text);
  write_text(etc / (options.name + ".filler"), "++BR++ BR\n++FP++ FP\n");

  const auto emit_split = [&](const std::vector<std::string>& codes,
                              int total, const std::string& suffix) {
    std::string fileids, transcription;
    int emitted = 0;
    int index = 1;
    while (emitted < total) {
      for (const auto& code : codes) {
        if (emitted == total) break;
        const Speaker& speaker = speakers.at(code);
        GeneratedUtterance utt = generate_utterance(speaker, index, rng);
        const auto rel = code + "/" + utt.id;
        std::filesystem::create_directories(wav / code);
        write_wav_pcm16(wav / (rel + ".wav"), utt.samples, kRate);
        fileids += rel + "\n";
        for (const auto& token : utt.tokens) transcription += token + " ";
        transcription += "(" + utt.id + ")\n";
        ++emitted;
      }
      ++index;
    }
    write_text(etc / (options.name + "_" + suffix + ".fileids"), fileids);
    write_text(etc / (options.name + "_" + suffix + ".transcription"),
               transcription);
  };

  emit_split(train_codes, options.num_train, "train");
  emit_split(test_codes, options.num_test, "test");
  write_text(options.out_dir / (options.name + ".cfg"),
             config_text(options.name));
}

}  // namespace tinysr
