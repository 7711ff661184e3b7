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

#ifndef TINYSR_COMMANDS_H_
#define TINYSR_COMMANDS_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tinysr/config.h"
#include "tinysr/toy_corpus.h"

namespace tinysr {

// Shared command-line context. Commands print diagnostics to err and
// results to out and return a process exit code (0 iff no errors;
// warnings are allowed).
struct CommandContext {
  std::ostream* out;
  std::ostream* err;
  int jobs = 1;
  bool verbose = false;
};

int cmd_features(const ExperimentConfig& cfg, const CommandContext& ctx);

struct LmCommandArgs {
  std::vector<std::filesystem::path> text_files;
  std::filesystem::path heldout_file;  // optional
  std::filesystem::path rules_file;    // optional
  int order = 3;
  // "laplace", "additive:K", "interpolated:L1,L2,L3"; several candidates
  // need a held-out set to pick the lowest-perplexity one.
  std::vector<std::string> smoothings;
  std::filesystem::path out_prefix;  // writes <prefix>.arpa and <prefix>.bin
  bool add_unk = false;
};
int cmd_lm(const LmCommandArgs& args, const CommandContext& ctx);

Smoothing parse_smoothing_spec(const std::string& spec, int order);

int cmd_train(const ExperimentConfig& cfg, const CommandContext& ctx);

int cmd_decode(const ExperimentConfig& cfg,
               const std::filesystem::path& model_path,
               const std::filesystem::path& lm_path,
               const std::filesystem::path& out_hyp,
               const CommandContext& ctx);

struct ScoreCommandArgs {
  std::filesystem::path ref_file;
  std::filesystem::path hyp_file;
  char group_delimiter = '_';  // speaker code = id prefix up to this
  std::filesystem::path json_out;  // optional
};
int cmd_score(const ScoreCommandArgs& args, const CommandContext& ctx);

int cmd_experiment(const ExperimentConfig& cfg, bool force,
                   const CommandContext& ctx);

int cmd_make_toy_corpus(const ToyCorpusOptions& options,
                        const CommandContext& ctx);

}  // namespace tinysr

#endif  // TINYSR_COMMANDS_H_
