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

#include "tinysr/commands.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "tinysr/corpus.h"
#include "tinysr/decoder.h"
#include "tinysr/errors.h"
#include "tinysr/eval.h"
#include "tinysr/parallel.h"
#include "tinysr/text_norm.h"
#include "tinysr/trainer.h"

namespace tinysr {
namespace {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

CorpusManifest manifest_from_config(const ExperimentConfig& cfg) {
  return load_manifest(cfg.resolve(cfg.etc_dir), cfg.corpus_name,
                       cfg.resolve(cfg.wav_dir), cfg.resolve(cfg.feat_dir));
}

std::vector<std::string> all_fileids(const CorpusManifest& manifest) {
  std::vector<std::string> ids = manifest.train.fileids;
  ids.insert(ids.end(), manifest.test.fileids.begin(),
             manifest.test.fileids.end());
  return ids;
}

// Loads feature files for a transcript set; failures are reported per
// utterance instead of aborting.
std::map<std::string, FeatureSequence> load_features(
    const CorpusManifest& manifest, const TranscriptSet& ts,
    std::vector<std::string>* failures) {
  std::map<std::string, FeatureSequence> features;
  for (const auto& fileid : ts.fileids) {
    const std::string id =
        std::filesystem::path(fileid).filename().string();
    const auto path = manifest.feat_dir / (fileid + ".feat");
    try {
      features.emplace(id, read_feat(path));
    } catch (const Error& e) {
      if (failures != nullptr) failures->push_back(e.what());
    }
  }
  return features;
}

std::map<std::string, FeatureMatrix> to_matrices(
    const std::map<std::string, FeatureSequence>& features) {
  std::map<std::string, FeatureMatrix> out;
  for (const auto& [id, fs] : features) {
    out.emplace(id, FeatureMatrix::from(fs));
  }
  return out;
}

std::string hyp_line(const std::vector<std::string>& tokens,
                     const std::string& id) {
  std::string line;
  for (const auto& token : tokens) {
    line += token;
    line += ' ';
  }
  line += "(" + id + ")";
  return line;
}

std::string group_of(const std::string& id, char delimiter) {
  const auto pos = id.find(delimiter);
  return pos == std::string::npos ? id : id.substr(0, pos);
}

}  // namespace

int cmd_features(const ExperimentConfig& cfg, const CommandContext& ctx) {
  const CorpusManifest manifest = manifest_from_config(cfg);
  ValidationOptions vopts;
  vopts.check_wav_files = true;
  const ValidationReport report = validate_corpus(manifest, vopts);
  *ctx.out << report.to_text();
  if (!report.is_clean()) return 1;

  const std::vector<std::string> fileids = all_fileids(manifest);
  std::vector<std::string> errors(fileids.size());
  std::filesystem::create_directories(manifest.feat_dir);

  parallel_blocks(fileids.size(), ctx.jobs,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i) {
                      const auto wav_path =
                          manifest.wav_dir / (fileids[i] + ".wav");
                      const auto feat_path =
                          manifest.feat_dir / (fileids[i] + ".feat");
                      try {
                        Waveform wave = read_wav(wav_path);
                        wave.source_id =
                            std::filesystem::path(fileids[i]).filename()
                                .string();
                        if (wave.sample_rate != cfg.frontend.sample_rate_hz) {
                          throw BadSampleRate(
                              wav_path.string() + ": sample rate " +
                              std::to_string(wave.sample_rate) +
                              ", expected " +
                              std::to_string(cfg.frontend.sample_rate_hz));
                        }
                        if (feat_path.has_parent_path()) {
                          std::filesystem::create_directories(
                              feat_path.parent_path());
                        }
                        write_feat(extract_features(wave, cfg.frontend),
                                   feat_path);
                      } catch (const Error& e) {
                        errors[i] = e.what();
                      }
                    }
                  });

  int failed = 0;
  for (const auto& e : errors) {
    if (!e.empty()) {
      *ctx.err << "error: " << e << "\n";
      ++failed;
    }
  }
  *ctx.out << "features: " << (fileids.size() - failed) << " written, "
           << failed << " failed\n";
  return failed == 0 ? 0 : 1;
}

Smoothing parse_smoothing_spec(const std::string& spec, int order) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg =
      colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "laplace") {
    if (!arg.empty()) throw BadConfig("laplace takes no parameter");
    return Smoothing::laplace();
  }
  if (kind == "additive") {
    if (arg.empty()) throw BadConfig("additive needs a constant, e.g. additive:0.5");
    const double k = std::stod(arg);
    if (!(k > 0.0)) throw BadConfig("additive smoothing requires k > 0");
    return Smoothing::additive(k);
  }
  if (kind == "interpolated") {
    std::vector<double> lambdas;
    std::istringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) lambdas.push_back(std::stod(item));
    if (static_cast<int>(lambdas.size()) != order) {
      throw BadConfig("interpolated needs " + std::to_string(order) +
                      " lambdas for order " + std::to_string(order));
    }
    return Smoothing::interpolated(lambdas);
  }
  throw BadConfig("unknown smoothing \"" + spec + "\"");
}

int cmd_lm(const LmCommandArgs& args, const CommandContext& ctx) {
  const NormalizationRules rules =
      args.rules_file.empty()
          ? NormalizationRules::defaults()
          : NormalizationRules::parse(read_text_file(args.rules_file));

  std::string raw;
  for (const auto& path : args.text_files) raw += read_text_file(path);
  const auto sentences = clean_text(raw, rules);
  if (sentences.empty()) {
    *ctx.err << "error: corpus is empty after cleanup\n";
    return 1;
  }
  const NGramCounts counts = count_ngrams(sentences, args.order);

  std::vector<std::vector<std::string>> heldout;
  if (!args.heldout_file.empty()) {
    heldout = clean_text(read_text_file(args.heldout_file), rules);
  }
  const auto specs = args.smoothings.empty()
                         ? std::vector<std::string>{"laplace"}
                         : args.smoothings;
  if (specs.size() > 1 && heldout.empty()) {
    *ctx.err << "error: comparing several smoothings needs --heldout\n";
    return 1;
  }

  struct Candidate {
    std::string spec;
    NGramModel model;
    double train_ppl;
    double heldout_ppl;
  };
  std::vector<Candidate> candidates;
  for (const auto& spec : specs) {
    Candidate c;
    c.spec = spec;
    c.model = estimate(counts, parse_smoothing_spec(spec, args.order),
                       args.add_unk);
    c.train_ppl = perplexity(c.model, sentences).perplexity;
    c.heldout_ppl =
        heldout.empty() ? 0.0 : perplexity(c.model, heldout).perplexity;
    candidates.push_back(std::move(c));
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].heldout_ppl < candidates[best].heldout_ppl) best = i;
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    char buf[160];
    if (heldout.empty()) {
      std::snprintf(buf, sizeof(buf), "%-24s train perplexity %.4f\n",
                    candidates[i].spec.c_str(), candidates[i].train_ppl);
    } else {
      std::snprintf(buf, sizeof(buf),
                    "%-24s train perplexity %.4f  held-out perplexity %.4f%s\n",
                    candidates[i].spec.c_str(), candidates[i].train_ppl,
                    candidates[i].heldout_ppl,
                    i == best && candidates.size() > 1 ? "  [selected]" : "");
    }
    *ctx.out << buf;
  }

  const NGramModel& model = candidates[best].model;
  const auto arpa = args.out_prefix.string() + ".arpa";
  const auto bin = args.out_prefix.string() + ".bin";
  if (args.out_prefix.has_parent_path()) {
    std::filesystem::create_directories(args.out_prefix.parent_path());
  }
  write_arpa(model, arpa);
  write_binary(model, bin);
  *ctx.out << "wrote " << arpa << " and " << bin << " (order " << model.order
           << ", vocabulary " << model.vocab_size() << ")\n";
  return 0;
}

namespace {

// Per-stage training driver shared by cmd_train and cmd_experiment.
// try_load may supply a cached stage model; on_saved runs after a stage
// is persisted.
int run_train_stages(
    const ExperimentConfig& cfg, const CommandContext& ctx,
    const CorpusManifest& manifest,
    const std::map<std::string, FeatureMatrix>& features,
    const std::function<bool(const std::string&)>& stage_cached,
    const std::function<void(const std::string&)>& stage_saved) {
  TrainOptions topt = cfg.train;
  topt.jobs = ctx.jobs;
  const auto model_dir = cfg.resolve(cfg.model_dir);
  std::filesystem::create_directories(model_dir);

  std::string log_text;
  const StageCallback on_stage = [&](const StageResult& sr,
                                     AcousticModel& model) {
    quantize_model(model);
    const auto path = model_dir / (sr.name + ".mam");
    write_model(model, path);
    model = read_model(path);  // continue from the persisted parameters
    for (std::size_t i = 0; i < sr.iteration_log_likelihoods.size(); ++i) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "stage=%s iter=%zu loglik=%.6f\n",
                    sr.name.c_str(), i + 1,
                    sr.iteration_log_likelihoods[i]);
      log_text += buf;
      if (ctx.verbose) *ctx.out << buf;
    }
    *ctx.out << "stage " << sr.name << ": "
             << sr.iteration_log_likelihoods.size() << " iteration(s), "
             << "final loglik "
             << (sr.iteration_log_likelihoods.empty()
                     ? 0.0
                     : sr.iteration_log_likelihoods.back())
             << "\n";
    if (stage_saved) stage_saved(sr.name);
  };
  const StageSource try_load = [&](const std::string& name)
      -> std::optional<AcousticModel> {
    if (!stage_cached || !stage_cached(name)) return std::nullopt;
    const auto path = model_dir / (name + ".mam");
    if (!std::filesystem::exists(path)) return std::nullopt;
    *ctx.out << "stage " << name << ": cached\n";
    return read_model(path);
  };

  run_training(manifest, features, topt, on_stage, try_load);
  write_text_file(model_dir / "train.log", log_text);
  return 0;
}

}  // namespace

int cmd_train(const ExperimentConfig& cfg, const CommandContext& ctx) {
  const CorpusManifest manifest = manifest_from_config(cfg);
  ValidationOptions vopts;
  vopts.check_feat_files = true;
  const ValidationReport report = validate_corpus(manifest, vopts);
  if (!report.is_clean()) {
    *ctx.out << report.to_text();
    return 1;
  }
  std::vector<std::string> failures;
  const auto features =
      to_matrices(load_features(manifest, manifest.train, &failures));
  for (const auto& f : failures) *ctx.err << "warning: " << f << "\n";
  return run_train_stages(cfg, ctx, manifest, features, nullptr, nullptr);
}

namespace {

int decode_to_file(const CorpusManifest& manifest, const AcousticModel& am,
                   const NGramModel& lm, const DecodeConfig& dc,
                   const std::map<std::string, FeatureSequence>& features,
                   const std::filesystem::path& out_hyp,
                   const CommandContext& ctx) {
  const BatchDecodeResult batch =
      batch_decode(manifest, am, lm, dc, features, ctx.jobs);
  std::string text;
  for (const auto& utt : manifest.test.utterances) {
    const auto it = batch.hypotheses.find(utt.id);
    if (it != batch.hypotheses.end()) {
      text += hyp_line(it->second.tokens, utt.id) + "\n";
    }
  }
  write_text_file(out_hyp, text);
  for (const auto& [id, why] : batch.failures) {
    *ctx.err << "warning: " << id << ": " << why << "\n";
  }
  *ctx.out << "decoded " << batch.hypotheses.size() << " utterance(s), "
           << batch.failures.size() << " failure(s) -> " << out_hyp.string()
           << "\n";
  return 0;
}

}  // namespace

int cmd_decode(const ExperimentConfig& cfg,
               const std::filesystem::path& model_path,
               const std::filesystem::path& lm_path,
               const std::filesystem::path& out_hyp,
               const CommandContext& ctx) {
  const CorpusManifest manifest = manifest_from_config(cfg);
  const AcousticModel am = read_model(model_path);
  const NGramModel lm = lm_path.extension() == ".arpa"
                            ? read_arpa(lm_path)
                            : read_binary(lm_path);
  std::vector<std::string> failures;
  const auto features = load_features(manifest, manifest.test, &failures);
  for (const auto& f : failures) *ctx.err << "warning: " << f << "\n";
  return decode_to_file(manifest, am, lm, cfg.decode, features, out_hyp, ctx);
}

namespace {

std::vector<std::tuple<std::vector<std::string>, std::vector<std::string>,
                       std::string>>
pairs_from_files(const std::filesystem::path& ref_file,
                 const std::filesystem::path& hyp_file, char delimiter,
                 const CommandContext& ctx) {
  const auto refs =
      TranscriptSet::parse_transcriptions(read_text_file(ref_file));
  const auto hyps =
      TranscriptSet::parse_transcriptions(read_text_file(hyp_file));
  std::map<std::string, const TranscriptSet::Utterance*> hyp_by_id;
  for (const auto& h : hyps) hyp_by_id[h.id] = &h;

  std::vector<std::tuple<std::vector<std::string>, std::vector<std::string>,
                         std::string>>
      pairs;
  for (const auto& ref : refs) {
    std::vector<std::string> hyp_tokens;
    const auto it = hyp_by_id.find(ref.id);
    if (it == hyp_by_id.end()) {
      *ctx.err << "warning: no hypothesis for utterance " << ref.id
               << " (scored as empty)\n";
    } else {
      hyp_tokens = it->second->tokens;
    }
    pairs.emplace_back(strip_nonscoring(ref.tokens),
                       strip_nonscoring(hyp_tokens),
                       group_of(ref.id, delimiter));
  }
  return pairs;
}

}  // namespace

int cmd_score(const ScoreCommandArgs& args, const CommandContext& ctx) {
  const auto pairs =
      pairs_from_files(args.ref_file, args.hyp_file, args.group_delimiter,
                       ctx);
  const ScoreReport report = score(pairs);
  *ctx.out << render_report(report);
  if (!args.json_out.empty()) {
    write_text_file(args.json_out, report_to_json(report));
  }
  return 0;
}

namespace {

// Digest over the config text and every corpus input byte; used to
// decide whether checkpointed stage outputs are still valid.
std::uint64_t experiment_digest(const ExperimentConfig& cfg,
                                const CorpusManifest& manifest) {
  std::uint64_t h = cfg.source_digest;
  const auto etc = cfg.resolve(cfg.etc_dir);
  for (const char* suffix :
       {".phone", ".dic", ".filler", "_train.fileids", "_train.transcription",
        "_test.fileids", "_test.transcription"}) {
    h = fnv1a64(read_text_file(etc / (cfg.corpus_name + suffix)), h);
  }
  for (const auto& fileid : all_fileids(manifest)) {
    const auto path = manifest.wav_dir / (fileid + ".wav");
    if (std::filesystem::exists(path)) {
      h = fnv1a64(read_text_file(path), h);
    }
  }
  return h;
}

class Checkpoints {
 public:
  Checkpoints(std::filesystem::path dir, std::uint64_t digest, bool force)
      : dir_(std::move(dir)), force_(force) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(digest));
    digest_ = buf;
  }

  bool done(const std::string& stage) const {
    if (force_) return false;
    std::ifstream in(dir_ / (stage + ".done"));
    std::string stored;
    return in && std::getline(in, stored) && stored == digest_;
  }
  void mark(const std::string& stage) const {
    std::filesystem::create_directories(dir_);
    write_text_file(dir_ / (stage + ".done"), digest_ + "\n");
  }

 private:
  std::filesystem::path dir_;
  std::string digest_;
  bool force_;
};

struct StageMetrics {
  std::string stage;
  std::string kind;
  int mixtures = 0;
  double correct = 0.0, accuracy = 0.0, ser = 0.0;
};

}  // namespace

int cmd_experiment(const ExperimentConfig& cfg, bool force,
                   const CommandContext& ctx) {
  const CorpusManifest manifest = manifest_from_config(cfg);
  const auto result_dir = cfg.resolve(cfg.result_dir);
  const auto model_dir = cfg.resolve(cfg.model_dir);
  std::filesystem::create_directories(result_dir);
  const Checkpoints checkpoints(result_dir / ".checkpoints",
                                experiment_digest(cfg, manifest), force);
  std::string current_stage = "setup";
  try {
    // 1. features
    current_stage = "features";
    if (checkpoints.done("features")) {
      *ctx.out << "stage features: cached\n";
    } else {
      if (cmd_features(cfg, ctx) != 0) return 1;
      checkpoints.mark("features");
    }

    // 2. language model from the training transcriptions
    current_stage = "lm";
    const auto lm_bin = cfg.lm_path.empty()
                            ? result_dir / "lm.bin"
                            : cfg.resolve(cfg.lm_path);
    if (checkpoints.done("lm")) {
      *ctx.out << "stage lm: cached\n";
    } else {
      std::string text;
      for (const auto& utt : manifest.train.utterances) {
        for (const auto& token : utt.tokens) {
          if (!is_filler_token(token)) text += token + " ";
        }
        text += "\n";
      }
      const auto sentences = clean_text(text, NormalizationRules::defaults());
      if (sentences.empty()) throw EmptyCorpus("no training sentences");
      const NGramModel lm =
          estimate(count_ngrams(sentences, cfg.lm_order), cfg.smoothing());
      write_arpa(lm, result_dir / "lm.arpa");
      write_binary(lm, lm_bin);
      char buf[96];
      std::snprintf(buf, sizeof(buf), "lm: train perplexity %.4f\n",
                    perplexity(lm, sentences).perplexity);
      *ctx.out << buf;
      checkpoints.mark("lm");
    }
    const NGramModel lm = read_binary(lm_bin);

    // 3. acoustic model stages
    current_stage = "train";
    std::vector<std::string> feat_failures;
    const auto train_feats =
        to_matrices(load_features(manifest, manifest.train, &feat_failures));
    for (const auto& f : feat_failures) *ctx.err << "warning: " << f << "\n";
    run_train_stages(
        cfg, ctx, manifest, train_feats,
        [&](const std::string& stage) { return checkpoints.done("train_" + stage); },
        [&](const std::string& stage) { checkpoints.mark("train_" + stage); });

    // 4. decode and score every stage
    std::vector<std::string> stage_names;
    for (const int m : cfg.train.mixture_schedule) {
      stage_names.push_back("ci_" + std::to_string(m));
    }
    if (cfg.train.cd_enabled) {
      for (const int m : cfg.train.mixture_schedule) {
        stage_names.push_back("cd_" + std::to_string(m));
      }
    }
    std::vector<std::string> test_failures;
    const auto test_feats =
        load_features(manifest, manifest.test, &test_failures);
    for (const auto& f : test_failures) *ctx.err << "warning: " << f << "\n";

    std::vector<StageMetrics> metrics;
    for (const auto& stage : stage_names) {
      current_stage = stage;
      const auto hyp_path = result_dir / (stage + ".hyp");
      const auto score_json = result_dir / (stage + ".score.json");
      if (!checkpoints.done("eval_" + stage)) {
        const AcousticModel am = read_model(model_dir / (stage + ".mam"));
        decode_to_file(manifest, am, lm, cfg.decode, test_feats, hyp_path,
                       ctx);
        const auto pairs = pairs_from_files(
            cfg.resolve(cfg.etc_dir) /
                (cfg.corpus_name + "_test.transcription"),
            hyp_path, '_', ctx);
        const ScoreReport report = score(pairs);
        write_text_file(result_dir / (stage + ".score.txt"),
                        render_report(report));
        write_text_file(score_json, report_to_json(report));
        checkpoints.mark("eval_" + stage);
      } else {
        *ctx.out << "stage " << stage << ": scores cached\n";
      }
      // summary numbers come from the persisted per-stage score files
      const auto records = nlohmann::json::parse(read_text_file(score_json));
      StageMetrics sm;
      sm.stage = stage;
      sm.kind = stage.substr(0, 2);
      sm.mixtures = std::stoi(stage.substr(3));
      for (const auto& rec : records) {
        if (rec.at("group") == "Total") {
          sm.correct = rec.at("percent_correct").get<double>();
          sm.accuracy = rec.at("percent_accuracy").get<double>();
          sm.ser = rec.at("percent_ser").get<double>();
        }
      }
      metrics.push_back(sm);
    }

    // 5. summary table
    current_stage = "summary";
    std::string table;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-6s %-9s %10s %11s %8s\n", "MODEL",
                  "MIXTURES", "% Correct", "% Accuracy", "% SER");
    table += buf;
    nlohmann::json summary = nlohmann::json::array();
    for (const auto& sm : metrics) {
      std::snprintf(buf, sizeof(buf), "%-6s %-9d %10.2f %11.2f %8.2f\n",
                    sm.kind.c_str(), sm.mixtures, sm.correct, sm.accuracy,
                    sm.ser);
      table += buf;
      summary.push_back({{"stage", sm.stage},
                         {"kind", sm.kind},
                         {"mixtures", sm.mixtures},
                         {"percent_correct", sm.correct},
                         {"percent_accuracy", sm.accuracy},
                         {"percent_ser", sm.ser}});
    }
    *ctx.out << table;
    write_text_file(result_dir / "summary.txt", table);
    write_text_file(result_dir / "summary.json", summary.dump(2) + "\n");
    return 0;
  } catch (const Error& e) {
    *ctx.err << "error: stage " << current_stage << " failed: " << e.what()
             << "\n"
             << "completed stages are checkpointed under "
             << (result_dir / ".checkpoints").string()
             << "; rerun the same command to resume\n";
    return 1;
  }
}

int cmd_make_toy_corpus(const ToyCorpusOptions& options,
                        const CommandContext& ctx) {
  make_toy_corpus(options);
  *ctx.out << "toy corpus written to " << options.out_dir.string() << " ("
           << options.num_train << " train / " << options.num_test
           << " test utterances, seed " << options.seed << ")\n"
           << "config: " << (options.out_dir / (options.name + ".cfg")).string()
           << "\n";
  return 0;
}

}  // namespace tinysr
