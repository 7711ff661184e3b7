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

#ifndef TINYSR_CONFIG_H_
#define TINYSR_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tinysr/decoder.h"
#include "tinysr/frontend.h"
#include "tinysr/ngram.h"
#include "tinysr/trainer.h"

namespace tinysr {

// Declarative experiment setup, read from a key=value file. Key names
// follow the usual training-config vocabulary in lower case
// (wavfile_srate, hmm_type, ...). Relative paths resolve against
// base_dir, which defaults to the config file's directory.
struct ExperimentConfig {
  std::filesystem::path base_dir;
  std::string corpus_name = "corpus";
  std::filesystem::path etc_dir = "etc";
  std::filesystem::path wav_dir = "wav";
  std::filesystem::path feat_dir = "feat";
  std::filesystem::path model_dir = "model";
  std::filesystem::path result_dir = "result";

  std::string hmm_type = "continuous";
  FrontendConfig frontend;
  TrainOptions train;

  int lm_order = 3;
  std::string lm_smoothing = "laplace";
  double lm_additive_k = 1.0;
  std::vector<double> lm_lambdas = {0.1, 0.2, 0.7};
  std::filesystem::path lm_path;  // empty: result_dir/lm.bin

  DecodeConfig decode;

  std::uint64_t source_digest = 0;  // hash of the config text

  static ExperimentConfig parse(const std::string& text,
                                const std::filesystem::path& base_dir);
  static ExperimentConfig parse_file(const std::filesystem::path& path);

  // Throws BadConfig; rejects hmm_type values other than "continuous"
  // and malformed mixture schedules.
  void validate() const;

  std::filesystem::path resolve(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : base_dir / p;
  }
  Smoothing smoothing() const;  // from lm_smoothing/lm_additive_k/lambdas
};

// FNV-1a over a byte string; used for config and input digests.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0);

}  // namespace tinysr

#endif  // TINYSR_CONFIG_H_
