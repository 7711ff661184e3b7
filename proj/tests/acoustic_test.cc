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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "test_support.h"
#include "tinysr/acoustic.h"
#include "tinysr/errors.h"
#include "tinysr/rng.h"
#include "tinysr/trainer.h"

using namespace tinysr;
using namespace tinysr::testing;

namespace {

std::filesystem::path temp_dir() {
  const auto dir =
      std::filesystem::temp_directory_path() / "tinysr_acoustic_test";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("gaussian scorer matches the density formula") {
  Rng rng(3);
  const int dim = 5;
  std::vector<GaussianMixture> pool = {random_gmm(rng, dim, 3)};
  const GmmScorer scorer(pool, dim);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(dim);
    for (auto& v : x) v = rng.normal(0.0, 2.0);
    // direct evaluation of sum_c w_c N(x; mu_c, diag var_c)
    double p = 0.0;
    const GaussianMixture& g = pool[0];
    for (int c = 0; c < g.num_components(); ++c) {
      double q = g.weights[c];
      for (int d = 0; d < dim; ++d) {
        const double m = g.means[c * dim + d];
        const double v = g.variances[c * dim + d];
        q *= std::exp(-0.5 * (x[d] - m) * (x[d] - m) / v) /
             std::sqrt(2.0 * M_PI * v);
      }
      p += q;
    }
    CHECK(scorer.log_like(0, x.data()) ==
          doctest::Approx(std::log(p)).epsilon(1e-10));
  }
}

TEST_CASE("compile_utterance_hmm") {
  const TinyTask task = make_tiny_task(4, 3.0, {"A", "B"});
  AcousticModel model = task.model;
  // word with both phones
  PronunciationDictionary dict;
  dict.entries["AB"] = {{"A", "B"}};
  dict.entries["TWO"] = {{"A", "B"}, {"B"}};
  FillerDictionary fillers = FillerDictionary::parse("++FP++ FP\n");
  // add an FP phone for the filler case
  {
    PhoneHmm fp = model.hmms.at("A");
    fp.label = "FP";
    model.hmms.emplace("FP", fp);
  }

  SUBCASE("single word gives the SIL A B SIL chain") {
    const CompositeHmm hmm =
        compile_utterance_hmm({"AB"}, dict, fillers, model);
    CHECK(hmm.num_states() == 12);  // 4 phone instances
    CHECK(hmm.entries.size() == 1);
    CHECK(hmm.min_path_frames == 12);
    int finals = 0;
    for (const double f : hmm.final_logp) {
      if (f != kNegInf) ++finals;
    }
    CHECK(finals == 1);
  }

  SUBCASE("filler token maps to its phone") {
    const CompositeHmm hmm =
        compile_utterance_hmm({"++FP++"}, dict, fillers, model);
    CHECK(hmm.num_states() == 9);  // SIL FP SIL
  }

  SUBCASE("two pronunciations become parallel branches") {
    const CompositeHmm hmm =
        compile_utterance_hmm({"TWO"}, dict, fillers, model);
    // SIL + (A B | B) + SIL = 2 + 3 + 2 phone instances... states:
    // 3*(1 + 2 + 1 + 1) = 15
    CHECK(hmm.num_states() == 15);
    // both branches enter from the initial silence: its exit fans out
    const int sil_exit = 2;
    int fanout = 0;
    for (const auto& arc : hmm.arcs) {
      if (arc.from == sil_exit && arc.to != sil_exit) ++fanout;
    }
    CHECK(fanout == 2);
  }

  SUBCASE("optional inter-token silence adds a skippable branch") {
    CompileOptions opts;
    opts.optional_silence_between_tokens = true;
    const CompositeHmm with_sil =
        compile_utterance_hmm({"AB", "AB"}, dict, fillers, model, opts);
    opts.optional_silence_between_tokens = false;
    const CompositeHmm without_sil =
        compile_utterance_hmm({"AB", "AB"}, dict, fillers, model, opts);
    CHECK(with_sil.num_states() == without_sil.num_states() + 3);
    // the optional branch does not change the shortest alignment
    CHECK(with_sil.min_path_frames == without_sil.min_path_frames);
  }

  SUBCASE("unknown token is rejected by name") {
    CHECK_THROWS_WITH_AS(
        compile_utterance_hmm({"NOPE"}, dict, fillers, model),
        doctest::Contains("NOPE"), UnknownToken);
  }
}

TEST_CASE("forward matches brute-force enumeration on random chains") {
  Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const int dim = 3;
    const int num_states = rng.uniform_int(1, 4);
    const RandomChain chain = random_chain(rng, num_states, dim);
    const int T = rng.uniform_int(num_states, 8);
    const FeatureMatrix feats = random_features(rng, T, dim);
    const GmmScorer scorer(chain.pool, dim);

    const EnumerationResult oracle =
        enumerate_all(chain.hmm, chain.pool, feats, dim);
    const double forward =
        forward_backward(chain.hmm, feats, scorer, nullptr);
    CHECK(forward ==
          doctest::Approx(oracle.forward).epsilon(1e-9));

    const ViterbiPath path = viterbi_align(chain.hmm, feats, scorer);
    CHECK(path.log_prob == doctest::Approx(oracle.viterbi).epsilon(1e-9));
    CHECK(path.states == oracle.best_path);
  }
}

TEST_CASE("forward on a branchy compiled graph matches enumeration") {
  Rng rng(11);
  TinyTask task = make_tiny_task(2, 2.0, {"A"});
  // give the word a second, shorter pronunciation
  task.manifest.dictionary.entries["WA"].push_back({"A"});
  for (int trial = 0; trial < 5; ++trial) {
    const CompositeHmm hmm = compile_utterance_hmm(
        {"WA"}, task.manifest.dictionary, task.manifest.fillers, task.model);
    const int T = rng.uniform_int(hmm.min_path_frames, 11);
    const FeatureMatrix feats = random_features(rng, T, 2);
    const GmmScorer scorer(task.model.pool, 2);
    const EnumerationResult oracle =
        enumerate_all(hmm, task.model.pool, feats, 2);
    CHECK(forward_backward(hmm, feats, scorer, nullptr) ==
          doctest::Approx(oracle.forward).epsilon(1e-9));
    CHECK(viterbi_align(hmm, feats, scorer).log_prob ==
          doctest::Approx(oracle.viterbi).epsilon(1e-9));
  }
}

TEST_CASE("single state, loop 0.5/exit 0.5, T=1") {
  Rng rng(13);
  const int dim = 2;
  std::vector<GaussianMixture> pool = {random_gmm(rng, dim, 1)};
  CompositeHmm hmm;
  hmm.pool_state = {0};
  hmm.owners = {"x"};
  hmm.arcs.push_back({0, 0, std::log(0.5), 0, 0, 1});
  hmm.final_logp = {std::log(0.5)};
  hmm.final_owner = {0};
  hmm.entries = {{0, 0.0}};
  hmm.min_path_frames = 1;
  hmm.build_adjacency();

  const FeatureMatrix feats = random_features(rng, 1, dim);
  const GmmScorer scorer(pool, dim);
  const double expected =
      std::log(0.5) + scorer.log_like(0, feats.frame(0));
  CHECK(forward_backward(hmm, feats, scorer, nullptr) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("state posteriors sum to one per frame") {
  Rng rng(17);
  const TinyTask task = make_tiny_task(3, 2.0, {"A", "B"});
  const CompositeHmm hmm = compile_utterance_hmm(
      {"WA", "WB"}, task.manifest.dictionary, task.manifest.fillers,
      task.model);
  const FeatureMatrix feats = random_features(rng, 26, 3);
  const GmmScorer scorer(task.model.pool, 3);
  TrainingStats stats;
  stats.init(task.model);
  std::vector<double> gamma;
  forward_backward(hmm, feats, scorer, &stats, &gamma);
  for (int t = 0; t < feats.num_frames; ++t) {
    double sum = 0.0;
    for (int s = 0; s < hmm.num_states(); ++s) {
      sum += gamma[static_cast<std::size_t>(t) * hmm.num_states() + s];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("utterance shorter than the shortest alignment is rejected") {
  Rng rng(19);
  const TinyTask task = make_tiny_task(2, 2.0, {"A"});
  const CompositeHmm hmm = compile_utterance_hmm(
      {"WA"}, task.manifest.dictionary, task.manifest.fillers, task.model);
  REQUIRE(hmm.min_path_frames == 9);
  const FeatureMatrix feats = random_features(rng, 8, 2);
  const GmmScorer scorer(task.model.pool, 2);
  CHECK_THROWS_AS(forward_backward(hmm, feats, scorer, nullptr),
                  UtteranceTooShort);
  CHECK_THROWS_AS(viterbi_align(hmm, feats, scorer), UtteranceTooShort);
}

TEST_CASE("flat start") {
  TrainOptions options;
  options.variance_floor = 1e-4;

  SUBCASE("largest-remainder segmentation, earlier states first") {
    // 1 word of 1 phone plus 2 silences: 9 states, 12 frames.
    TinyTask task = make_tiny_task(1, 1.0, {"A"});
    task.manifest.train.utterances = {{"u1", {"WA"}}};
    task.manifest.train.fileids = {"u1"};
    std::map<std::string, FeatureMatrix> feats;
    FeatureMatrix m;
    m.dim = 1;
    m.num_frames = 12;
    for (int t = 0; t < 12; ++t) m.data.push_back(static_cast<double>(t));
    feats.emplace("u1", m);

    const AcousticModel model = flat_start(task.manifest, feats, options);
    // Independent replay of the segmentation rule over the 9 slots
    // (sizes [2 2 2 1 1 1 1 1 1]); the two SIL instances share pool
    // states, so their statistics pool.
    const std::vector<std::string> phones = {"SIL", "A", "SIL"};
    std::vector<std::uint32_t> slot_state;
    for (const auto& p : phones) {
      for (int s = 0; s < 3; ++s) {
        slot_state.push_back(model.hmms.at(p).states[s]);
      }
    }
    const int S = static_cast<int>(slot_state.size());
    const int base = 12 / S, extra = 12 - base * S;
    std::map<std::uint32_t, std::vector<double>> assigned;
    int t = 0;
    for (int s = 0; s < S; ++s) {
      const int len = base + (s < extra ? 1 : 0);
      CHECK(len == (s < 3 ? 2 : 1));
      for (int j = 0; j < len; ++j, ++t) {
        assigned[slot_state[s]].push_back(static_cast<double>(t));
      }
    }
    for (const auto& [state, frames] : assigned) {
      double mean = 0.0;
      for (const double v : frames) mean += v;
      mean /= static_cast<double>(frames.size());
      CHECK(model.pool[state].means[0] ==
            doctest::Approx(mean).epsilon(1e-12));
    }
  }

  SUBCASE("identical frames give floored variances and the common mean") {
    TinyTask task = make_tiny_task(2, 1.0, {"A"});
    task.manifest.train.utterances = {{"u1", {"WA"}}};
    task.manifest.train.fileids = {"u1"};
    std::map<std::string, FeatureMatrix> feats;
    FeatureMatrix m;
    m.dim = 2;
    m.num_frames = 18;
    for (int t = 0; t < 18; ++t) {
      m.data.push_back(0.7);
      m.data.push_back(-0.3);
    }
    feats.emplace("u1", m);
    const AcousticModel model = flat_start(task.manifest, feats, options);
    for (const auto& g : model.pool) {
      CHECK(g.means[0] == doctest::Approx(0.7));
      CHECK(g.means[1] == doctest::Approx(-0.3));
      CHECK(g.variances[0] == options.variance_floor);
      CHECK(g.variances[1] == options.variance_floor);
    }
  }

  SUBCASE("no utterances is an error") {
    TinyTask task = make_tiny_task(2, 1.0, {"A"});
    std::map<std::string, FeatureMatrix> feats;
    CHECK_THROWS_AS(flat_start(task.manifest, feats, options),
                    NoTrainingData);
  }
}

TEST_CASE("EM: ten iterations never decrease the likelihood") {
  Rng rng(23);
  TinyTask task = make_tiny_task(3, 2.5);
  std::map<std::string, FeatureMatrix> feats;
  fill_random_transcripts(task, rng, 200, &feats);

  TrainOptions options;
  options.optional_silence = false;
  AcousticModel model = flat_start(task.manifest, feats, options);
  std::vector<double> lls;
  for (int it = 0; it < 10; ++it) {
    const IterationResult res =
        baum_welch_iteration(model, task.manifest, feats, options);
    CHECK(res.skipped == 0);
    lls.push_back(res.total_log_likelihood);
  }
  for (std::size_t i = 1; i < lls.size(); ++i) {
    CHECK(lls[i] >= lls[i - 1] - 1e-6 * std::abs(lls[i - 1]));
  }
}

TEST_CASE("zero-occupancy component: parameters held, weight floored") {
  TinyTask task = make_tiny_task(1, 2.0, {"A"});
  AcousticModel model = task.model;
  // give every state a far-away second component no frame will claim
  for (auto& g : model.pool) {
    g.weights = {0.999, 0.001};
    g.means.push_back(1e4);
    g.variances.push_back(0.5);
  }
  task.manifest.train.utterances = {{"u1", {"WA"}}};
  task.manifest.train.fileids = {"u1"};
  Rng rng(29);
  std::map<std::string, FeatureMatrix> feats;
  feats.emplace("u1", sample_utterance(task, {"WA"}, rng));

  TrainOptions options;
  baum_welch_iteration(model, task.manifest, feats, options);
  for (const auto& g : model.pool) {
    CHECK(g.means[1 * 1 + 0] == 1e4);  // untouched
    CHECK(g.weights[1] ==
          doctest::Approx(options.weight_floor / (1.0 + options.weight_floor))
              .epsilon(1e-6));
    CHECK(g.weights[0] + g.weights[1] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("sharded accumulation equals serial accumulation") {
  Rng rng(31);
  TinyTask task = make_tiny_task(3, 2.0);
  std::map<std::string, FeatureMatrix> feats;
  fill_random_transcripts(task, rng, 20, &feats);
  const GmmScorer scorer(task.model.pool, task.model.dim);

  const auto accumulate = [&](std::size_t begin, std::size_t end,
                              TrainingStats& stats) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& utt = task.manifest.train.utterances[i];
      const CompositeHmm hmm = compile_utterance_hmm(
          utt.tokens, task.manifest.dictionary, task.manifest.fillers,
          task.model);
      forward_backward(hmm, feats.at(utt.id), scorer, &stats);
    }
  };

  TrainingStats serial;
  serial.init(task.model);
  accumulate(0, 20, serial);

  TrainingStats merged;
  merged.init(task.model);
  for (int shard = 0; shard < 4; ++shard) {
    TrainingStats part;
    part.init(task.model);
    accumulate(shard * 5, shard * 5 + 5, part);
    merged.add(part);
  }

  CHECK(merged.total_log_likelihood ==
        doctest::Approx(serial.total_log_likelihood).epsilon(1e-9));
  REQUIRE(merged.states.size() == serial.states.size());
  for (std::size_t i = 0; i < serial.states.size(); ++i) {
    for (std::size_t c = 0; c < serial.states[i].occ.size(); ++c) {
      CHECK(merged.states[i].occ[c] ==
            doctest::Approx(serial.states[i].occ[c]).epsilon(1e-9));
    }
    for (std::size_t j = 0; j < serial.states[i].mean_acc.size(); ++j) {
      CHECK(merged.states[i].mean_acc[j] ==
            doctest::Approx(serial.states[i].mean_acc[j]).epsilon(1e-9));
    }
  }
  for (const auto& [label, acc] : serial.transitions) {
    const auto& other = merged.transitions.at(label);
    for (int s = 0; s < 3; ++s) {
      CHECK(other.self[s] == doctest::Approx(acc.self[s]).epsilon(1e-9));
      CHECK(other.forward[s] == doctest::Approx(acc.forward[s]).epsilon(1e-9));
    }
  }
}

TEST_CASE("likelihood is invariant under pool relabeling") {
  Rng rng(37);
  TinyTask task = make_tiny_task(3, 2.0);
  std::map<std::string, FeatureMatrix> feats;
  fill_random_transcripts(task, rng, 5, &feats);

  // permute the pool and rewire the state indices
  AcousticModel permuted = task.model;
  const int n = static_cast<int>(permuted.pool.size());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.uniform_int(0, i)]);
  }
  std::vector<GaussianMixture> new_pool(n);
  for (int i = 0; i < n; ++i) new_pool[perm[i]] = task.model.pool[i];
  permuted.pool = std::move(new_pool);
  for (auto& [label, hmm] : permuted.hmms) {
    (void)label;
    for (int s = 0; s < kNumEmittingStates; ++s) {
      hmm.states[s] = static_cast<std::uint32_t>(perm[hmm.states[s]]);
    }
  }

  const GmmScorer s1(task.model.pool, 3), s2(permuted.pool, 3);
  for (const auto& utt : task.manifest.train.utterances) {
    const CompositeHmm h1 = compile_utterance_hmm(
        utt.tokens, task.manifest.dictionary, task.manifest.fillers,
        task.model);
    const CompositeHmm h2 = compile_utterance_hmm(
        utt.tokens, task.manifest.dictionary, task.manifest.fillers,
        permuted);
    const double a = forward_backward(h1, feats.at(utt.id), s1, nullptr);
    const double b = forward_backward(h2, feats.at(utt.id), s2, nullptr);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("split_mixtures") {
  Rng rng(41);

  SUBCASE("one component splits to mirrored pair") {
    AcousticModel model;
    model.dim = 2;
    GaussianMixture g;
    g.dim = 2;
    g.weights = {1.0};
    g.means = {1.0, -2.0};
    g.variances = {0.25, 4.0};
    model.pool.push_back(g);
    const AcousticModel split = split_mixtures(model, 2);
    const GaussianMixture& s = split.pool[0];
    REQUIRE(s.num_components() == 2);
    CHECK(s.weights[0] == 0.5);
    CHECK(s.weights[1] == 0.5);
    CHECK(s.means[0] == doctest::Approx(1.0 - 0.2 * 0.5));
    CHECK(s.means[1] == doctest::Approx(-2.0 - 0.2 * 2.0));
    CHECK(s.means[2] == doctest::Approx(1.0 + 0.2 * 0.5));
    CHECK(s.means[3] == doctest::Approx(-2.0 + 0.2 * 2.0));
    CHECK(s.variances == std::vector<double>{0.25, 4.0, 0.25, 4.0});
  }

  SUBCASE("weights still sum to one for random models") {
    TinyTask task = make_tiny_task(4, 1.0);
    AcousticModel model = task.model;
    for (const int target : {2, 4, 8}) {
      model = split_mixtures(model, target);
      for (const auto& g : model.pool) {
        CHECK(std::accumulate(g.weights.begin(), g.weights.end(), 0.0) ==
              doctest::Approx(1.0).epsilon(1e-9));
        CHECK(g.num_components() == target);
      }
    }
  }

  SUBCASE("non-doubling targets are rejected") {
    TinyTask task = make_tiny_task(2, 1.0);
    CHECK_THROWS_AS(split_mixtures(task.model, 3), BadSchedule);
    CHECK_THROWS_AS(split_mixtures(task.model, 4), BadSchedule);
    const AcousticModel two = split_mixtures(task.model, 2);
    CHECK_THROWS_AS(split_mixtures(two, 2), BadSchedule);
  }

  SUBCASE("split then re-estimate tracks a bimodal distribution") {
    // single-phone task; the middle phone state sees two modes at +/-2
    TinyTask task = make_tiny_task(1, 3.0, {"A"});
    task.manifest.train.utterances = {};
    task.manifest.train.fileids = {};
    Rng local(43);
    std::map<std::string, FeatureMatrix> feats;
    for (int u = 0; u < 60; ++u) {
      const std::string id = "u" + std::to_string(u);
      task.manifest.train.utterances.push_back({id, {"WA"}});
      task.manifest.train.fileids.push_back(id);
      FeatureMatrix m;
      m.dim = 1;
      // 4 frames silence-ish at -6, 8 bimodal frames, 4 more at -6
      for (int t = 0; t < 4; ++t) m.data.push_back(local.normal(-6.0, 0.3));
      const double mode = local.bernoulli(0.5) ? 2.0 : -2.0;
      for (int t = 0; t < 8; ++t) m.data.push_back(local.normal(mode, 0.3));
      for (int t = 0; t < 4; ++t) m.data.push_back(local.normal(-6.0, 0.3));
      m.num_frames = 16;
      feats.emplace(id, std::move(m));
    }
    TrainOptions options;
    options.optional_silence = false;
    AcousticModel model = flat_start(task.manifest, feats, options);
    for (int it = 0; it < 4; ++it) {
      baum_welch_iteration(model, task.manifest, feats, options);
    }
    model = split_mixtures(model, 2);
    for (int it = 0; it < 10; ++it) {
      baum_welch_iteration(model, task.manifest, feats, options);
    }
    // the middle state of phone A should have components near +/-2
    const PhoneHmm& a = model.hmms.at("A");
    const GaussianMixture& g = model.pool[a.states[1]];
    REQUIRE(g.num_components() == 2);
    const double lo = std::min(g.means[0], g.means[1]);
    const double hi = std::max(g.means[0], g.means[1]);
    CHECK(std::abs(lo - (-2.0)) < 0.5 * 0.3 + 0.35);
    CHECK(std::abs(hi - 2.0) < 0.5 * 0.3 + 0.35);
  }
}

TEST_CASE("context-dependent model building") {
  TinyTask task = make_tiny_task(2, 1.0, {"A", "B", "C"});
  // word ABC = A B C, word AB = A B
  task.manifest.dictionary =
      PronunciationDictionary::parse("ABC A B C\nAB A B\n");
  task.manifest.train.utterances = {
      {"u1", {"ABC", "ABC"}}, {"u2", {"ABC", "ABC"}}, {"u3", {"ABC", "AB"}}};
  task.manifest.train.fileids = {"u1", "u2", "u3"};
  // A-B+C occurs 5 times (from ABC), A-B+SIL once (from AB)

  SUBCASE("frequent triphone gets a dedicated clone") {
    const AcousticModel cd = build_cd_model(task.model, task.manifest, 3);
    CHECK(cd.kind == ModelKind::kContextDependent);
    REQUIRE(cd.hmms.count("A-B+C") == 1);
    const auto& clone = cd.hmms.at("A-B+C");
    const auto& base = cd.hmms.at("B");
    for (int s = 0; s < 3; ++s) {
      CHECK(clone.states[s] != base.states[s]);
      CHECK(cd.pool[clone.states[s]].means ==
            cd.pool[base.states[s]].means);
    }
    const auto resolved = cd.resolve("B", "A", "C");
    CHECK(resolved.owner == "A-B+C");
    CHECK(resolved.states == clone.states);
  }

  SUBCASE("rare triphone ties to the base phone") {
    const AcousticModel cd = build_cd_model(task.model, task.manifest, 3);
    REQUIRE(cd.tying.count("A-B+SIL") == 1);
    CHECK(cd.hmms.count("A-B+SIL") == 0);
    const auto resolved = cd.resolve("B", "A", "SIL");
    CHECK(resolved.owner == "B");
    CHECK(resolved.states == cd.hmms.at("B").states);
  }

  SUBCASE("higher threshold ties everything") {
    const AcousticModel cd = build_cd_model(task.model, task.manifest, 10);
    CHECK(cd.hmms.count("A-B+C") == 0);
    CHECK(cd.resolve("B", "A", "C").states == cd.hmms.at("B").states);
  }

  SUBCASE("every training triphone resolves through the tying map") {
    Rng rng(47);
    TinyTask random_task = make_tiny_task(2, 1.0, {"A", "B", "C"});
    random_task.manifest.dictionary = PronunciationDictionary::parse(
        "W1 A B C\nW2 B C\nW3 C A B A\nW4 A\n");
    fill_random_transcripts(random_task, rng, 30, nullptr, 4);
    const AcousticModel cd =
        build_cd_model(random_task.model, random_task.manifest, 2);
    for (const auto& utt : random_task.manifest.train.utterances) {
      for (const auto& token : utt.tokens) {
        const auto& pron =
            random_task.manifest.dictionary.entries.at(token).front();
        for (std::size_t i = 0; i < pron.size(); ++i) {
          const std::string left = i == 0 ? "SIL" : pron[i - 1];
          const std::string right =
              i + 1 == pron.size() ? "SIL" : pron[i + 1];
          CHECK(cd.tying.count(triphone_label(left, pron[i], right)) == 1);
        }
      }
    }
  }
}

TEST_CASE("model file round trip") {
  Rng rng(53);
  const auto dir = temp_dir();
  TinyTask task = make_tiny_task(5, 2.0, {"A", "B"});
  task.manifest.dictionary = PronunciationDictionary::parse("AB A B\n");
  task.manifest.train.utterances = {
      {"u1", {"AB", "AB", "AB"}}, {"u2", {"AB"}}};
  task.manifest.train.fileids = {"u1", "u2"};

  SUBCASE("quantized models round trip bit-exactly") {
    AcousticModel model = split_mixtures(task.model, 2);
    quantize_model(model);
    const auto path = dir / "ci.mam";
    write_model(model, path);
    const AcousticModel back = read_model(path);
    CHECK(back.dim == model.dim);
    CHECK(back.kind == model.kind);
    REQUIRE(back.pool.size() == model.pool.size());
    for (std::size_t i = 0; i < model.pool.size(); ++i) {
      CHECK(back.pool[i].weights == model.pool[i].weights);
      CHECK(back.pool[i].means == model.pool[i].means);
      CHECK(back.pool[i].variances == model.pool[i].variances);
    }
    for (const auto& [label, hmm] : model.hmms) {
      const auto& other = back.hmms.at(label);
      CHECK(other.self_loop == hmm.self_loop);
      CHECK(other.forward == hmm.forward);
      CHECK(other.states == hmm.states);
    }
    // and the file itself is a write/read fixpoint
    const auto path2 = dir / "ci2.mam";
    write_model(back, path2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), {});
    std::string b2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(b1 == b2);
  }

  SUBCASE("cd model round trip preserves the tying map") {
    AcousticModel cd = build_cd_model(task.model, task.manifest, 2);
    quantize_model(cd);
    const auto path = dir / "cd.mam";
    write_model(cd, path);
    const AcousticModel back = read_model(path);
    CHECK(back.kind == ModelKind::kContextDependent);
    CHECK(back.tying == cd.tying);
  }

  SUBCASE("wrong magic is rejected") {
    const auto path = dir / "junk.mam";
    std::ofstream out(path, std::ios::binary);
    out << "WHAT" << std::string(64, '\0');
    out.close();
    CHECK_THROWS_AS(read_model(path), CorruptModelFile);
  }

  SUBCASE("truncation is rejected") {
    AcousticModel model = task.model;
    quantize_model(model);
    const auto path = dir / "trunc.mam";
    write_model(model, path);
    std::filesystem::resize_file(path,
                                 std::filesystem::file_size(path) / 2);
    CHECK_THROWS_AS(read_model(path), CorruptModelFile);
  }
}

TEST_CASE("run_training: stage names, cardinality, monotone stages") {
  Rng rng(59);
  TinyTask task = make_tiny_task(3, 2.5);
  std::map<std::string, FeatureMatrix> feats;
  fill_random_transcripts(task, rng, 40, &feats);

  TrainOptions options;
  options.mixture_schedule = {1, 2};
  options.iterations_per_stage = 3;
  options.cd_enabled = true;
  options.cd_min_count = 2;
  options.optional_silence = false;

  const auto stages =
      run_training(task.manifest, feats, options, nullptr);
  REQUIRE(stages.size() == 4);
  CHECK(stages[0].name == "ci_1");
  CHECK(stages[1].name == "ci_2");
  CHECK(stages[2].name == "cd_1");
  CHECK(stages[3].name == "cd_2");
  for (const auto& stage : stages) {
    for (std::size_t i = 1; i < stage.iteration_log_likelihoods.size(); ++i) {
      CHECK(stage.iteration_log_likelihoods[i] >=
            stage.iteration_log_likelihoods[i - 1] -
                1e-6 * std::abs(stage.iteration_log_likelihoods[i - 1]));
    }
  }
}
