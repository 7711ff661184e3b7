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

// tinysr: a miniature HMM/GMM speech recognition toolkit.
//
//   tinysr make-toy-corpus --out DIR [--train N] [--test N] [--seed S]
//   tinysr features   --config CFG
//   tinysr lm         --text FILE... --out PREFIX [--order N]
//                     [--smoothing SPEC]... [--heldout FILE] [--rules FILE]
//   tinysr train      --config CFG
//   tinysr decode     --config CFG --model FILE [--lm FILE] [--out FILE]
//   tinysr score      --ref FILE --hyp FILE [--json FILE] [--group-delim C]
//   tinysr experiment --config CFG [--force]

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tinysr/commands.h"
#include "tinysr/errors.h"
#include "tinysr/simd/kernels.h"

int main(int argc, char** argv) {
  CLI::App app{"tinysr - miniature HMM/GMM speech recognition toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  int jobs = 1;
  std::uint64_t seed = 1;
  bool verbose = false;
  std::string simd_backend = "auto";
  app.add_option("--config", config_path, "experiment config file")
      ->envname("TINYSR_CONFIG");
  app.add_option("--jobs", jobs, "worker threads for per-utterance work");
  app.add_option("--seed", seed, "random seed (corpus generation)");
  app.add_flag("--verbose", verbose, "per-iteration log output");
  app.add_option("--simd", simd_backend,
                 "kernel backend: auto, scalar, avx2, neon");

  auto* gen = app.add_subcommand("make-toy-corpus",
                                 "generate the synthetic desk-scale corpus");
  std::string out_dir = "toy_corpus";
  int num_train = 300, num_test = 50;
  std::string corpus_name = "toy";
  gen->add_option("--out", out_dir, "output directory");
  gen->add_option("--train", num_train, "training utterances");
  gen->add_option("--test", num_test, "test utterances");
  gen->add_option("--name", corpus_name, "corpus name");

  auto* features =
      app.add_subcommand("features", "extract MFCC features for the corpus");

  auto* lm = app.add_subcommand("lm", "estimate an n-gram language model");
  std::vector<std::string> lm_texts;
  std::string lm_heldout, lm_rules, lm_out = "lm";
  int lm_order = 3;
  std::vector<std::string> lm_smoothings;
  bool lm_unk = false;
  lm->add_option("--text", lm_texts, "input text file(s)")->required();
  lm->add_option("--out", lm_out, "output prefix (.arpa and .bin)");
  lm->add_option("--order", lm_order, "n-gram order (1-3)");
  lm->add_option("--smoothing", lm_smoothings,
                 "laplace | additive:K | interpolated:L1,..  (repeatable)");
  lm->add_option("--heldout", lm_heldout, "held-out text for selection");
  lm->add_option("--rules", lm_rules, "normalization rules file");
  lm->add_flag("--unk", lm_unk, "reserve an <UNK> word for OOV tokens");

  auto* train = app.add_subcommand("train", "run the training schedule");

  auto* decode = app.add_subcommand("decode", "decode the test set");
  std::string decode_model, decode_lm, decode_out;
  decode->add_option("--model", decode_model, "acoustic model file")
      ->required();
  decode->add_option("--lm", decode_lm, "language model (.bin or .arpa)");
  decode->add_option("--out", decode_out, "hypothesis output file");

  auto* scorecmd = app.add_subcommand("score", "align and score hypotheses");
  std::string score_ref, score_hyp, score_json;
  std::string group_delim = "_";
  scorecmd->add_option("--ref", score_ref, "reference transcription file")
      ->required();
  scorecmd->add_option("--hyp", score_hyp, "hypothesis file")->required();
  scorecmd->add_option("--json", score_json, "machine-readable output file");
  scorecmd->add_option("--group-delim", group_delim,
                       "speaker grouping delimiter in utterance ids");

  auto* experiment = app.add_subcommand(
      "experiment", "full pipeline: features, lm, train, decode, score");
  bool force = false;
  experiment->add_flag("--force", force, "ignore stage checkpoints");

  CLI11_PARSE(app, argc, argv);

  if (!tinysr::simd::select_backend(simd_backend)) {
    std::cerr << "error: unknown or unsupported --simd backend \""
              << simd_backend << "\"\n";
    return 2;
  }

  tinysr::CommandContext ctx{&std::cout, &std::cerr, jobs, verbose};
  const auto need_config = [&]() {
    if (config_path.empty()) {
      throw tinysr::BadConfig("this subcommand needs --config");
    }
    return tinysr::ExperimentConfig::parse_file(config_path);
  };

  try {
    if (gen->parsed()) {
      tinysr::ToyCorpusOptions options;
      options.out_dir = out_dir;
      options.name = corpus_name;
      options.num_train = num_train;
      options.num_test = num_test;
      options.seed = seed;
      return tinysr::cmd_make_toy_corpus(options, ctx);
    }
    if (features->parsed()) return tinysr::cmd_features(need_config(), ctx);
    if (lm->parsed()) {
      tinysr::LmCommandArgs args;
      for (const auto& t : lm_texts) args.text_files.emplace_back(t);
      args.heldout_file = lm_heldout;
      args.rules_file = lm_rules;
      args.order = lm_order;
      args.smoothings = lm_smoothings;
      args.out_prefix = lm_out;
      args.add_unk = lm_unk;
      return tinysr::cmd_lm(args, ctx);
    }
    if (train->parsed()) return tinysr::cmd_train(need_config(), ctx);
    if (decode->parsed()) {
      const auto cfg = need_config();
      const auto lm_path =
          decode_lm.empty()
              ? cfg.resolve(cfg.result_dir) / "lm.bin"
              : std::filesystem::path(decode_lm);
      const auto out_path =
          decode_out.empty()
              ? cfg.resolve(cfg.result_dir) / "decode.hyp"
              : std::filesystem::path(decode_out);
      return tinysr::cmd_decode(cfg, decode_model, lm_path, out_path, ctx);
    }
    if (scorecmd->parsed()) {
      tinysr::ScoreCommandArgs args;
      args.ref_file = score_ref;
      args.hyp_file = score_hyp;
      args.json_out = score_json;
      if (group_delim.size() != 1) {
        throw tinysr::BadConfig("--group-delim must be a single character");
      }
      args.group_delimiter = group_delim[0];
      return tinysr::cmd_score(args, ctx);
    }
    if (experiment->parsed()) {
      return tinysr::cmd_experiment(need_config(), force, ctx);
    }
  } catch (const tinysr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
