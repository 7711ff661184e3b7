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

#ifndef TINYSR_NGRAM_H_
#define TINYSR_NGRAM_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace tinysr {

inline constexpr const char* kSentenceStart = "<s>";
inline constexpr const char* kSentenceEnd = "</s>";
inline constexpr const char* kUnkWord = "<UNK>";

// Event and context counts for all orders up to `order`. Each sentence
// is padded with order-1 sentence-start symbols and one sentence end.
// The start symbol appears only in contexts, never as a predicted event,
// so it is not part of the vocabulary; its symbol id is vocab.size().
struct NGramCounts {
  int order = 1;
  std::vector<std::string> vocab;  // sorted; includes </s>, excludes <s>

  // events[k-1]: length-k tuple (context..., word) -> count
  // contexts[k-1]: length-(k-1) context tuple -> count (sum over words)
  std::vector<std::map<std::vector<int>, long long>> events;
  std::vector<std::map<std::vector<int>, long long>> contexts;

  long long num_events = 0;  // unigram events: words + one </s> per sentence

  int start_id() const { return static_cast<int>(vocab.size()); }
  int word_id(const std::string& word) const;  // -1 if absent, start for <s>

  // String-keyed lookups for tests and reports; tuples may contain <s>.
  long long event_count(std::span<const std::string> tuple) const;
  long long context_count(std::span<const std::string> tuple) const;
};

NGramCounts count_ngrams(
    const std::vector<std::vector<std::string>>& sentences, int order);

enum class SmoothingKind { kLaplace, kAdditive, kInterpolated };

struct Smoothing {
  SmoothingKind kind = SmoothingKind::kLaplace;
  double k = 1.0;                // additive constant
  std::vector<double> lambdas;   // interpolated weights, unigram first
  double epsilon = 1e-10;        // interpolated positivity floor

  static Smoothing laplace() { return {}; }
  static Smoothing additive(double k);
  static Smoothing interpolated(std::vector<double> lambdas);

  std::string describe() const;
};

// Fully materialized conditional probability tables. P(w|h) is defined
// for every vocabulary word and every history over vocabulary words and
// the start symbol, so normalization holds for unseen histories too.
struct NGramModel {
  int order = 1;
  std::vector<std::string> vocab;  // sorted; includes </s>, excludes <s>
  std::string smoothing_desc;

  // tables[k-1] has (V+1)^(k-1) * V linear probabilities; the history
  // rank is mixed-radix over symbol ids (start symbol id == V).
  std::vector<std::vector<double>> tables;

  int vocab_size() const { return static_cast<int>(vocab.size()); }
  int start_id() const { return vocab_size(); }
  int word_id(const std::string& word) const;  // -1 if absent, start for <s>
  int unk_id() const { return word_id(kUnkWord); }
  int end_id() const { return word_id(kSentenceEnd); }

  // P(word | history) at the model order; history uses its last order-1
  // entries and is padded with the start symbol when shorter.
  double prob(std::span<const int> history, int word) const;
  // Same at an explicit lower order (1 <= k <= order).
  double prob_order(int k, std::span<const int> history, int word) const;

  std::size_t history_rank(int k, std::span<const int> history) const;
  std::size_t num_histories(int k) const;  // (V+1)^(k-1)
};

// Estimates a model from counts.
//   laplace:      P(w|h) = (c(h,w) + 1) / (c(h) + V)
//   additive(k):  P(w|h) = (c(h,w) + k) / (c(h) + kV)
//   interpolated: sum_j lambda_j * ML_j(w | suffix of h), with zero-count
//                 ML terms contributing 0, then an epsilon floor and
//                 per-history renormalization so every history sums to 1.
// add_unk extends the vocabulary with an <UNK> word of zero count.
// Throws EmptyCorpus when counts contain no events.
NGramModel estimate(const NGramCounts& counts, const Smoothing& smoothing,
                    bool add_unk = false);

struct PerplexityResult {
  double log2_prob_total = 0.0;  // sum of log2 P over predicted events
  std::size_t num_events = 0;    // words plus one </s> per sentence
  double perplexity = 1.0;       // 2^(-log2_prob_total / num_events)
};

// Throws OovToken for tokens outside the vocabulary unless the model
// has <UNK>.
PerplexityResult perplexity(
    const NGramModel& model,
    const std::vector<std::vector<std::string>>& sentences);

// ARPA-style text: \data\ header with per-order entry counts, then
// per-order sections of (log10 prob, tuple) lines. No backoff weights:
// the tables are written exhaustively.
void write_arpa(const NGramModel& model, const std::filesystem::path& path);
NGramModel read_arpa(const std::filesystem::path& path);

// Binary: magic "MLM1", u32 version=1, u8 order, u32 V, vocabulary as
// length-prefixed UTF-8 strings, then per order a u64 entry count and
// entries as (word-index tuple, float32 log10 prob), little-endian.
// The start symbol is encoded as index V.
void write_binary(const NGramModel& model, const std::filesystem::path& path);
NGramModel read_binary(const std::filesystem::path& path);

}  // namespace tinysr

#endif  // TINYSR_NGRAM_H_
