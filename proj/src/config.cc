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

#include "tinysr/config.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tinysr/errors.h"

namespace tinysr {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed ^ 1469598103934665603ull;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw BadConfig(key + ": expected a number, got \"" + value + "\"");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (v != std::floor(v)) {
    throw BadConfig(key + ": expected an integer, got \"" + value + "\"");
  }
  return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "yes" || value == "1") return true;
  if (value == "false" || value == "no" || value == "0") return false;
  throw BadConfig(key + ": expected true/false, got \"" + value + "\"");
}

std::vector<double> parse_list(const std::string& key,
                               const std::string& value) {
  std::vector<double> out;
  std::string item;
  std::istringstream ss(value);
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_double(key, trim(item)));
  }
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(
    const std::string& text, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  cfg.source_digest = fnv1a64(text);

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw BadConfig("config line " + std::to_string(line_no) +
                      ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "base_dir") {
      const std::filesystem::path p = value;
      cfg.base_dir = p.is_absolute() ? p : base_dir / p;
    } else if (key == "corpus_name") {
      cfg.corpus_name = value;
    } else if (key == "etc_dir") {
      cfg.etc_dir = value;
    } else if (key == "wavfiles_dir" || key == "wav_dir") {
      cfg.wav_dir = value;
    } else if (key == "feat_dir") {
      cfg.feat_dir = value;
    } else if (key == "model_dir") {
      cfg.model_dir = value;
    } else if (key == "result_dir") {
      cfg.result_dir = value;
    } else if (key == "wavfile_srate") {
      const double rate = parse_double(key, value);
      if (rate != std::floor(rate) || rate <= 0) {
        throw BadConfig("wavfile_srate must be a positive integer rate");
      }
      cfg.frontend.sample_rate_hz = static_cast<int>(rate);
    } else if (key == "hmm_type") {
      cfg.hmm_type = value;
    } else if (key == "preemphasis_coeff") {
      cfg.frontend.preemphasis_coeff = parse_double(key, value);
    } else if (key == "window_ms") {
      cfg.frontend.window_ms = parse_double(key, value);
    } else if (key == "overlap_ms") {
      cfg.frontend.overlap_ms = parse_double(key, value);
    } else if (key == "hamming_window") {
      cfg.frontend.use_hamming = parse_bool(key, value);
    } else if (key == "zero_mean") {
      cfg.frontend.zero_mean_waveform = parse_bool(key, value);
    } else if (key == "cepstral_lifter") {
      cfg.frontend.cepstral_lifter = parse_int(key, value);
    } else if (key == "num_cepstra") {
      cfg.frontend.num_cepstra = parse_int(key, value);
    } else if (key == "num_mel_filters") {
      cfg.frontend.num_mel_filters = parse_int(key, value);
    } else if (key == "mel_low_hz") {
      cfg.frontend.mel_low_hz = parse_double(key, value);
    } else if (key == "mel_high_hz") {
      cfg.frontend.mel_high_hz = parse_double(key, value);
    } else if (key == "fft_size") {
      cfg.frontend.fft_size = static_cast<std::size_t>(parse_int(key, value));
    } else if (key == "log_energy_floor") {
      cfg.frontend.log_energy_floor = parse_double(key, value);
    } else if (key == "cepstral_mean_norm") {
      cfg.frontend.cepstral_mean_norm = parse_bool(key, value);
    } else if (key == "mixture_schedule") {
      cfg.train.mixture_schedule.clear();
      for (const double v : parse_list(key, value)) {
        cfg.train.mixture_schedule.push_back(static_cast<int>(v));
      }
    } else if (key == "cd_enabled") {
      cfg.train.cd_enabled = parse_bool(key, value);
    } else if (key == "cd_min_count") {
      cfg.train.cd_min_count = parse_int(key, value);
    } else if (key == "iterations_per_stage") {
      cfg.train.iterations_per_stage = parse_int(key, value);
    } else if (key == "convergence_threshold") {
      cfg.train.convergence_rel = parse_double(key, value);
    } else if (key == "variance_floor") {
      cfg.train.variance_floor = parse_double(key, value);
    } else if (key == "mixture_weight_floor") {
      cfg.train.weight_floor = parse_double(key, value);
    } else if (key == "optional_silence") {
      cfg.train.optional_silence = parse_bool(key, value);
    } else if (key == "lm_order") {
      cfg.lm_order = parse_int(key, value);
    } else if (key == "lm_smoothing") {
      cfg.lm_smoothing = value;
    } else if (key == "lm_additive_k") {
      cfg.lm_additive_k = parse_double(key, value);
    } else if (key == "lm_lambdas") {
      cfg.lm_lambdas = parse_list(key, value);
    } else if (key == "lm_path") {
      cfg.lm_path = value;
    } else if (key == "beam") {
      const double v = parse_double(key, value);
      cfg.decode.beam_logwidth =
          v <= 0 ? std::numeric_limits<double>::infinity() : v;
    } else if (key == "language_weight") {
      cfg.decode.language_weight = parse_double(key, value);
    } else if (key == "word_insertion_penalty") {
      cfg.decode.word_insertion_penalty = parse_double(key, value);
    } else if (key == "filler_insertion_penalty") {
      cfg.decode.filler_insertion_penalty = parse_double(key, value);
    } else if (key == "max_active") {
      cfg.decode.max_active = static_cast<std::size_t>(parse_int(key, value));
    } else {
      throw BadConfig("config line " + std::to_string(line_no) +
                      ": unknown key \"" + key + "\"");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BadConfig("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.parent_path());
}

void ExperimentConfig::validate() const {
  if (hmm_type != "continuous") {
    if (hmm_type == "semi" || hmm_type == "ptm") {
      throw BadConfig("hmm_type \"" + hmm_type +
                      "\" is recognized but not implemented; only "
                      "\"continuous\" models are supported (see README "
                      "non-goals)");
    }
    throw BadConfig("hmm_type must be \"continuous\"");
  }
  if (train.mixture_schedule.empty() || train.mixture_schedule[0] != 1) {
    throw BadConfig("mixture_schedule must be a doubling chain starting at 1");
  }
  for (std::size_t i = 1; i < train.mixture_schedule.size(); ++i) {
    if (train.mixture_schedule[i] != 2 * train.mixture_schedule[i - 1]) {
      throw BadConfig("mixture_schedule must double at every step");
    }
  }
  if (train.mixture_schedule.back() > 8) {
    throw BadConfig("mixture_schedule values must be in {1,2,4,8}");
  }
  if (lm_order < 1 || lm_order > 3) {
    throw BadConfig("lm_order must be 1, 2 or 3");
  }
  if (lm_smoothing != "laplace" && lm_smoothing != "additive" &&
      lm_smoothing != "interpolated") {
    throw BadConfig("lm_smoothing must be laplace, additive or interpolated");
  }
  if (train.iterations_per_stage < 1) {
    throw BadConfig("iterations_per_stage must be >= 1");
  }
  frontend.validate();
  decode.validate();
}

Smoothing ExperimentConfig::smoothing() const {
  if (lm_smoothing == "laplace") return Smoothing::laplace();
  if (lm_smoothing == "additive") return Smoothing::additive(lm_additive_k);
  std::vector<double> lambdas = lm_lambdas;
  lambdas.resize(lm_order, 0.0);
  return Smoothing::interpolated(lambdas);
}

}  // namespace tinysr
