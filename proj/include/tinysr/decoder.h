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

#ifndef TINYSR_DECODER_H_
#define TINYSR_DECODER_H_

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "tinysr/acoustic.h"
#include "tinysr/corpus.h"
#include "tinysr/frontend.h"
#include "tinysr/ngram.h"

namespace tinysr {

// Token inserted for decoded silence segments; stripped before scoring.
inline constexpr const char* kSilToken = "<sil>";

struct DecodeConfig {
  // Prune hypotheses scoring below best - beam (natural log units);
  // infinity disables pruning.
  double beam_logwidth = 200.0;
  double language_weight = 6.5;
  double word_insertion_penalty = 0.0;
  // Applied per inserted filler (incl. <sil>); -inf disables insertion.
  double filler_insertion_penalty = -2.0;
  std::size_t max_active = 0;  // 0 = unlimited

  void validate() const;  // throws BadConfig
};

struct Hypothesis {
  std::vector<std::string> tokens;  // words and fillers, in time order
  double total_score = 0.0;
  double acoustic_score = 0.0;
  double lm_score = 0.0;  // natural-log LM sum incl. sentence end
  int num_words = 0;
  int num_fillers = 0;
};

// Static search network over HMM states: one word instance per
// (LM history, word) with the full n-gram history expansion, plus
// filler/silence loops on every history junction. LM scores are kept
// separate from structural scores so one graph serves any DecodeConfig.
class SearchGraph {
 public:
  struct Arc {
    std::int32_t to;
    std::int32_t from;       // -1 for entry arcs
    double base_logp;        // HMM transitions + pronunciation branch
    double lm_logp;          // scaled by language_weight at decode time
    std::int32_t token;      // index into token_labels, -1 inside words
    std::int8_t penalty;     // 0 none, 1 word start, 2 filler start
  };
  struct Final {
    double base_logp = -std::numeric_limits<double>::infinity();
    double lm_logp = 0.0;  // ln P(</s> | history)
  };

  std::vector<std::uint32_t> pool_state;       // per emitting state
  std::vector<std::vector<std::int32_t>> in_arcs;
  std::vector<Arc> arcs;
  std::vector<Arc> entry_arcs;
  std::vector<Final> finals;
  std::vector<std::string> token_labels;
  std::vector<std::int8_t> token_is_filler;

  const NGramModel* lm = nullptr;
  const AcousticModel* am = nullptr;

  int num_states() const { return static_cast<int>(pool_state.size()); }
  int num_histories() const { return num_histories_; }

  // Full decoding network; every LM word needs a pronunciation (throws
  // MissingPronunciation naming the missing ones).
  static SearchGraph build(const PronunciationDictionary& dict,
                           const FillerDictionary& fillers,
                           const NGramModel& lm, const AcousticModel& am);

  // Constrained network that accepts exactly `tokens` in order, with
  // optional silence loops at every junction; used for forced scoring.
  static SearchGraph build_forced(const std::vector<std::string>& tokens,
                                  const PronunciationDictionary& dict,
                                  const FillerDictionary& fillers,
                                  const NGramModel& lm,
                                  const AcousticModel& am);

  int num_histories_ = 0;
};

// Time-synchronous Viterbi beam search. With beam = inf and no
// max_active the result is the exact best path. Ties resolve to the
// lexicographically smallest token sequence. Throws EmptyFeatures and
// NoSurvivingPath.
Hypothesis decode(const FeatureSequence& features, const SearchGraph& graph,
                  const DecodeConfig& cfg);

// Best score of the reference token sequence through the same scoring
// scheme (alignment may insert silences between tokens).
Hypothesis forced_score(const std::vector<std::string>& tokens,
                        const PronunciationDictionary& dict,
                        const FillerDictionary& fillers, const NGramModel& lm,
                        const AcousticModel& am, const FeatureSequence& feats,
                        const DecodeConfig& cfg);

struct BatchDecodeResult {
  std::map<std::string, Hypothesis> hypotheses;   // by utterance id
  std::map<std::string, std::string> failures;    // id -> diagnostic
};

// Decodes every test utterance; per-utterance failures are recorded
// without aborting the batch.
BatchDecodeResult batch_decode(
    const CorpusManifest& manifest, const AcousticModel& am,
    const NGramModel& lm, const DecodeConfig& cfg,
    const std::map<std::string, FeatureSequence>& features, int jobs = 1);

}  // namespace tinysr

#endif  // TINYSR_DECODER_H_
