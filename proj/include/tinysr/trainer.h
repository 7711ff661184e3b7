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

#ifndef TINYSR_TRAINER_H_
#define TINYSR_TRAINER_H_

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tinysr/acoustic.h"
#include "tinysr/corpus.h"
#include "tinysr/frontend.h"

namespace tinysr {

// Feature frames widened to double for training math.
struct FeatureMatrix {
  int num_frames = 0;
  int dim = 0;
  std::vector<double> data;

  static FeatureMatrix from(const FeatureSequence& fs);
  const double* frame(int t) const {
    return data.data() + static_cast<std::size_t>(t) * dim;
  }
};

// Utterance-level HMM over emitting states: phone HMM instances joined
// by structural arcs (pronunciation branches, optional silence). Arc log
// probabilities fold the owning phone's transition probability with the
// structural branch probability; accumulation is keyed by owner.
struct CompositeHmm {
  struct Arc {
    std::int32_t from;
    std::int32_t to;
    double logp;
    std::int32_t owner;  // index into owners
    std::int8_t row;     // transition row 0..2
    std::int8_t self;    // 1 = self-loop, 0 = forward/exit
  };

  std::vector<std::uint32_t> pool_state;  // per emitting state
  std::vector<std::string> owners;        // transition owner labels
  std::vector<Arc> arcs;
  std::vector<std::pair<std::int32_t, double>> entries;  // (state, logp)
  // Exit probability per state (log), -inf when the state cannot end
  // the utterance; final_owner names the transition row accumulating
  // the exit event.
  std::vector<double> final_logp;
  std::vector<std::int32_t> final_owner;

  // Adjacency by destination / source, indices into arcs.
  std::vector<std::vector<std::int32_t>> in_arcs;
  std::vector<std::vector<std::int32_t>> out_arcs;

  int num_states() const { return static_cast<int>(pool_state.size()); }
  int min_path_frames = 0;

  void build_adjacency();
};

struct CompileOptions {
  bool optional_silence_between_tokens = true;
  bool first_pronunciation_only = false;
};

// Linear concatenation of phone HMMs for the token sequence with
// mandatory silence at both ends, optional-silence branches between
// tokens, and alternative pronunciations as parallel branches. CD
// models resolve word-internal triphones with silence outer context.
// Throws UnknownToken.
CompositeHmm compile_utterance_hmm(const std::vector<std::string>& tokens,
                                   const PronunciationDictionary& dict,
                                   const FillerDictionary& fillers,
                                   const AcousticModel& model,
                                   const CompileOptions& options = {});

// Sufficient statistics for re-estimation; mergeable by addition.
struct TrainingStats {
  struct GmmAccum {
    std::vector<double> occ;       // per component
    std::vector<double> mean_acc;  // component x dim
    std::vector<double> var_acc;   // component x dim (second moment)
  };
  struct TransAccum {
    std::array<double, kNumEmittingStates> self{0.0, 0.0, 0.0};
    std::array<double, kNumEmittingStates> forward{0.0, 0.0, 0.0};
  };

  std::vector<GmmAccum> states;  // indexed by pool id
  std::map<std::string, TransAccum> transitions;
  double total_log_likelihood = 0.0;
  std::size_t num_frames = 0;
  std::size_t num_utterances = 0;

  void init(const AcousticModel& model);
  void add(const TrainingStats& other);
};

// Exact log P(O | model) in log-domain arithmetic, accumulating state
// occupancy and transition statistics when stats != nullptr and the
// per-frame state posteriors when gamma != nullptr (T x num_states).
// Throws UtteranceTooShort when no valid alignment exists.
double forward_backward(const CompositeHmm& hmm, const FeatureMatrix& feats,
                        const GmmScorer& scorer, TrainingStats* stats,
                        std::vector<double>* gamma = nullptr);

struct ViterbiPath {
  double log_prob = 0.0;
  std::vector<int> states;  // length T
};

// Best state path and its joint log probability.
ViterbiPath viterbi_align(const CompositeHmm& hmm, const FeatureMatrix& feats,
                          const GmmScorer& scorer);

struct TrainOptions {
  std::vector<int> mixture_schedule{1, 2, 4, 8};
  bool cd_enabled = false;
  int cd_min_count = 3;
  int iterations_per_stage = 8;
  double convergence_rel = 1e-4;  // stop when relative gain drops below
  double variance_floor = 1e-4;
  double weight_floor = 1e-5;
  int jobs = 1;
  bool optional_silence = true;
};

// CI single-Gaussian initialization: frames divided uniformly across the
// utterance's linear state sequence (largest-remainder rounding, earlier
// states first); zero-occupancy states take the global mean/variance;
// transitions start at 0.5/0.5. Throws NoTrainingData.
AcousticModel flat_start(const CorpusManifest& manifest,
                         const std::map<std::string, FeatureMatrix>& features,
                         const TrainOptions& options);

struct IterationResult {
  double total_log_likelihood = 0.0;  // before the parameter update
  std::size_t used = 0;
  std::size_t skipped = 0;
};

// One Baum-Welch pass over the training set: accumulate, re-estimate
// weights/means/variances (floored) and transitions. Per-utterance
// failures are skipped with a count; throws NoTrainingData if every
// utterance fails.
IterationResult baum_welch_iteration(
    AcousticModel& model, const CorpusManifest& manifest,
    const std::map<std::string, FeatureMatrix>& features,
    const TrainOptions& options);

// Doubles every mixture: means perturbed by +/-0.2 sigma, variances
// copied, weights halved. target must be exactly twice the current
// component count (BadSchedule otherwise).
AcousticModel split_mixtures(const AcousticModel& model, int target);

// Enumerates word-internal triphones (outer contexts collapse to SIL)
// from the training transcripts. Triphones seen >= min_count times get
// dedicated HMMs cloned from the base phone; rarer ones tie to the base
// phone's states. SIL and fillers stay context-independent.
AcousticModel build_cd_model(const AcousticModel& ci_model,
                             const CorpusManifest& manifest, int min_count);

struct StageResult {
  std::string name;  // e.g. "ci_2", "cd_8"
  ModelKind kind;
  int mixtures = 0;
  std::vector<double> iteration_log_likelihoods;
};

// Full schedule: flat start, CI stages over the mixture schedule, then
// (when enabled) a CD model cloned from the first CI stage trained over
// the same schedule. on_stage runs after each stage and may replace the
// model (e.g. with a reloaded checkpoint); try_load may supply a cached
// model for a stage, skipping its training (resume support).
using StageCallback =
    std::function<void(const StageResult&, AcousticModel&)>;
using StageSource =
    std::function<std::optional<AcousticModel>(const std::string&)>;
std::vector<StageResult> run_training(
    const CorpusManifest& manifest,
    const std::map<std::string, FeatureMatrix>& features,
    const TrainOptions& options, const StageCallback& on_stage,
    const StageSource& try_load = nullptr);

// Rounds all model parameters through float32, the storage precision;
// persisting and reloading a quantized model is then exact.
void quantize_model(AcousticModel& model);

}  // namespace tinysr

#endif  // TINYSR_TRAINER_H_
