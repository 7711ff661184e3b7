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
#include <map>
#include <sstream>

#include "tinysr/errors.h"
#include "tinysr/ngram.h"
#include "tinysr/rng.h"
#include "tinysr/text_norm.h"

using namespace tinysr;

namespace {

using Sentences = std::vector<std::vector<std::string>>;

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "tinysr_lm_test";
  std::filesystem::create_directories(dir);
  return dir;
}

Sentences random_sentences(Rng& rng, int count, int vocab_size,
                           int max_len = 8) {
  Sentences out;
  for (int i = 0; i < count; ++i) {
    std::vector<std::string> s;
    const int len = rng.uniform_int(1, max_len);
    for (int j = 0; j < len; ++j) {
      s.push_back("w" + std::to_string(rng.uniform_int(0, vocab_size - 1)));
    }
    out.push_back(std::move(s));
  }
  return out;
}

// All histories a model defines probabilities over, as id vectors.
std::vector<std::vector<int>> sample_histories(const NGramModel& model,
                                               Rng& rng, int count) {
  std::vector<std::vector<int>> histories;
  for (int i = 0; i < count; ++i) {
    std::vector<int> h(model.order - 1);
    for (auto& sym : h) sym = rng.uniform_int(0, model.vocab_size());
    histories.push_back(std::move(h));
  }
  return histories;
}

double row_sum(const NGramModel& model, const std::vector<int>& history) {
  double sum = 0.0;
  for (int w = 0; w < model.vocab_size(); ++w) {
    sum += model.prob(history, w);
  }
  return sum;
}

}  // namespace

TEST_CASE("clean_text") {
  const NormalizationRules rules = NormalizationRules::defaults();

  SUBCASE("terminator splitting") {
    const auto s = clean_text("A B. C D.", rules);
    REQUIRE(s.size() == 2);
    CHECK(s[0] == std::vector<std::string>{"A", "B"});
    CHECK(s[1] == std::vector<std::string>{"C", "D"});
  }

  SUBCASE("digit-by-digit fallback") {
    const auto s = clean_text("ROOM 42", rules);
    REQUIRE(s.size() == 1);
    CHECK(s[0] == std::vector<std::string>{"ROOM", "FOUR", "TWO"});
  }

  SUBCASE("longest pattern wins over the fallback") {
    NormalizationRules r = rules;
    r.number_lexicon.emplace_back("42",
                                  std::vector<std::string>{"FORTY", "TWO"});
    const auto s = clean_text("ROOM 425", r);
    REQUIRE(s.size() == 1);
    CHECK(s[0] == std::vector<std::string>{"ROOM", "FORTY", "TWO", "FIVE"});
  }

  SUBCASE("punctuation removal") {
    const auto s = clean_text("A, (B) 'C'!", rules);
    REQUIRE(s.size() == 1);
    CHECK(s[0] == std::vector<std::string>{"A", "B", "C"});
  }

  SUBCASE("empty sentences are dropped") {
    CHECK(clean_text("...  !!", rules).empty());
  }

  SUBCASE("cleanup is a fixpoint on 1000 random sentences") {
    Rng rng(31);
    const std::vector<std::string> junk = {",", ".", "!", "?", "(", ")", "7",
                                           "42"};
    std::string raw;
    for (int i = 0; i < 1000; ++i) {
      const int len = rng.uniform_int(1, 8);
      for (int j = 0; j < len; ++j) {
        raw += "word" + std::to_string(rng.uniform_int(0, 20));
        if (rng.bernoulli(0.3)) raw += junk[rng.uniform_int(0, 7)];
        raw += " ";
      }
      raw += ". ";
    }
    const auto once = clean_text(raw, rules);
    // join each sentence back with terminators and re-clean
    std::string rejoined;
    for (const auto& s : once) {
      for (const auto& t : s) rejoined += t + " ";
      rejoined += ". ";
    }
    const auto twice = clean_text(rejoined, rules);
    CHECK(once == twice);
  }

  SUBCASE("rules file round trip and digit coverage") {
    const NormalizationRules parsed =
        NormalizationRules::parse(rules.to_text());
    CHECK(parsed.punctuation == rules.punctuation);
    CHECK(parsed.number_lexicon == rules.number_lexicon);
    CHECK_THROWS_AS(NormalizationRules::parse("number 1 ONE\n"), BadConfig);
  }
}

TEST_CASE("count_ngrams") {
  SUBCASE("unigram counts of [a b a]") {
    const auto counts = count_ngrams({{"a", "b", "a"}}, 1);
    CHECK(counts.num_events == 4);
    CHECK(counts.event_count(std::vector<std::string>{"a"}) == 2);
    CHECK(counts.event_count(std::vector<std::string>{"b"}) == 1);
    CHECK(counts.event_count(std::vector<std::string>{"</s>"}) == 1);
  }

  SUBCASE("bigram counts of [a b a]") {
    const auto counts = count_ngrams({{"a", "b", "a"}}, 2);
    CHECK(counts.event_count(std::vector<std::string>{"<s>", "a"}) == 1);
    CHECK(counts.event_count(std::vector<std::string>{"a", "b"}) == 1);
    CHECK(counts.event_count(std::vector<std::string>{"b", "a"}) == 1);
    CHECK(counts.event_count(std::vector<std::string>{"a", "</s>"}) == 1);
    CHECK(counts.event_count(std::vector<std::string>{"b", "</s>"}) == 0);
    CHECK(counts.context_count(std::vector<std::string>{"<s>"}) == 1);
    CHECK(counts.context_count(std::vector<std::string>{"a"}) == 2);
  }

  SUBCASE("200 random sentences match a nested-loop recount") {
    Rng rng(37);
    const Sentences sentences = random_sentences(rng, 200, 5);
    const auto counts = count_ngrams(sentences, 3);

    // independent brute-force tally over padded sentences
    std::map<std::vector<std::string>, long long> expected[3];
    long long events = 0;
    for (const auto& s : sentences) {
      std::vector<std::string> padded = {"<s>", "<s>"};
      padded.insert(padded.end(), s.begin(), s.end());
      padded.push_back("</s>");
      for (std::size_t pos = 2; pos < padded.size(); ++pos) {
        ++events;
        for (int k = 1; k <= 3; ++k) {
          expected[k - 1][std::vector<std::string>(
              padded.begin() + pos - (k - 1), padded.begin() + pos + 1)]++;
        }
      }
    }
    CHECK(counts.num_events == events);
    for (int k = 1; k <= 3; ++k) {
      for (const auto& [tuple, count] : expected[k - 1]) {
        CAPTURE(k);
        CHECK(counts.event_count(tuple) == count);
      }
    }
  }

  SUBCASE("every event's context is counted at the lower order") {
    Rng rng(41);
    const Sentences sentences = random_sentences(rng, 30, 4);
    const auto counts = count_ngrams(sentences, 3);
    for (int k = 2; k <= 3; ++k) {
      for (const auto& [tuple, count] : counts.events[k - 1]) {
        const std::vector<int> prefix(tuple.begin(), tuple.end() - 1);
        CHECK(counts.contexts[k - 1].at(prefix) >= count);
      }
    }
  }
}

TEST_CASE("estimate: hand-arithmetic laplace cases from [a b a]") {
  const auto counts1 = count_ngrams({{"a", "b", "a"}}, 1);
  const NGramModel uni = estimate(counts1, Smoothing::laplace());
  // V = {a, b, </s>} => 3
  REQUIRE(uni.vocab_size() == 3);
  const int a = uni.word_id("a"), b = uni.word_id("b");
  const int end = uni.end_id();
  const std::vector<int> no_hist;
  CHECK(uni.prob(no_hist, a) == 3.0 / 7.0);  // (2+1)/(4+3), exact
  CHECK(uni.prob(no_hist, b) == 2.0 / 7.0);
  CHECK(uni.prob(no_hist, end) == 2.0 / 7.0);
  CHECK(row_sum(uni, no_hist) == doctest::Approx(1.0).epsilon(1e-12));

  const auto counts2 = count_ngrams({{"a", "b", "a"}}, 2);
  const NGramModel bi = estimate(counts2, Smoothing::laplace());
  const std::vector<int> start_hist = {bi.start_id()};
  CHECK(bi.prob(start_hist, bi.word_id("a")) == 2.0 / 4.0);  // (1+1)/(1+3)
  CHECK(bi.prob(start_hist, bi.word_id("b")) == 1.0 / 4.0);
  CHECK(bi.prob(start_hist, bi.end_id()) == 1.0 / 4.0);
}

TEST_CASE("estimate: additive limit approaches uniform") {
  const auto counts = count_ngrams({{"a", "b", "a"}, {"b", "b"}}, 2);
  const NGramModel model = estimate(counts, Smoothing::additive(1e6));
  const double uniform = 1.0 / model.vocab_size();
  const std::vector<int> hist = {model.word_id("a")};
  for (int w = 0; w < model.vocab_size(); ++w) {
    CHECK(std::abs(model.prob(hist, w) - uniform) < 1e-3 * uniform);
  }
}

TEST_CASE("estimate: preconditions") {
  const auto counts = count_ngrams({{"a"}}, 2);
  CHECK_THROWS_AS(estimate(counts, Smoothing::additive(0.0)), BadConfig);
  CHECK_THROWS_AS(estimate(counts, Smoothing::additive(-1.0)), BadConfig);
  CHECK_THROWS_AS(estimate(counts, Smoothing::interpolated({0.5, 0.6})),
                  BadConfig);
  CHECK_THROWS_AS(estimate(counts, Smoothing::interpolated({0.5})), BadConfig);
  CHECK_THROWS_AS(count_ngrams({}, 0), BadConfig);
  NGramCounts empty;
  empty.order = 1;
  CHECK_THROWS_AS(estimate(empty, Smoothing::laplace()), EmptyCorpus);
}

TEST_CASE("normalization, positivity, monotonicity over random corpora") {
  Rng rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const int order = 1 + trial % 3;
    const Sentences sentences =
        random_sentences(rng, rng.uniform_int(3, 30), rng.uniform_int(2, 6));
    const auto counts = count_ngrams(sentences, order);
    const std::vector<Smoothing> smoothings = {
        Smoothing::laplace(), Smoothing::additive(0.1),
        Smoothing::additive(10.0),
        Smoothing::interpolated(std::vector<double>(
            order, 1.0 / order))};
    for (const auto& smoothing : smoothings) {
      const NGramModel model = estimate(counts, smoothing);
      // includes histories never seen in training
      for (const auto& h : sample_histories(model, rng, 25)) {
        CHECK(std::abs(row_sum(model, h) - 1.0) < 1e-9);
      }
      double min_p = 1.0;
      for (const auto& table : model.tables) {
        for (const double p : table) min_p = std::min(min_p, p);
      }
      CHECK(min_p > 0.0);
    }

    // growing k moves every probability toward uniform
    const NGramModel k1 = estimate(counts, Smoothing::additive(1.0));
    const NGramModel k2 = estimate(counts, Smoothing::additive(5.0));
    const double uniform = 1.0 / k1.vocab_size();
    for (std::size_t i = 0; i < k1.tables.back().size(); ++i) {
      CHECK(std::abs(k2.tables.back()[i] - uniform) <=
            std::abs(k1.tables.back()[i] - uniform) + 1e-15);
    }
  }
}

TEST_CASE("perplexity") {
  SUBCASE("uniform unigram over V=4 gives exactly 4") {
    // corpus a b c: every unigram count is 1, so laplace is uniform
    const NGramModel model =
        estimate(count_ngrams({{"a", "b", "c"}}, 1), Smoothing::laplace());
    REQUIRE(model.vocab_size() == 4);
    const auto result = perplexity(model, {{"a", "c", "b"}});
    CHECK(result.perplexity == 4.0);
    CHECK(result.num_events == 4);
  }

  SUBCASE("hand-computed laplace case: 7/sqrt(6)") {
    const NGramModel model =
        estimate(count_ngrams({{"a", "b", "a"}}, 1), Smoothing::laplace());
    const auto result = perplexity(model, {{"a"}});
    CHECK(result.num_events == 2);
    CHECK(result.perplexity ==
          doctest::Approx(7.0 / std::sqrt(6.0)).epsilon(1e-12));
  }

  SUBCASE("oov token without <UNK> throws, with <UNK> does not") {
    const auto counts = count_ngrams({{"a", "b"}}, 1);
    const NGramModel closed = estimate(counts, Smoothing::laplace());
    CHECK_THROWS_AS(perplexity(closed, {{"zzz"}}), OovToken);
    const NGramModel open = estimate(counts, Smoothing::laplace(), true);
    CHECK(perplexity(open, {{"zzz"}}).perplexity > 1.0);
  }

  SUBCASE("trained trigram beats trained unigram on training text") {
    Rng rng(47);
    for (int trial = 0; trial < 20; ++trial) {
      const Sentences sentences =
          random_sentences(rng, rng.uniform_int(5, 40), 4, 10);
      // ML-dominant interpolated smoothing at both orders
      const NGramModel tri = estimate(count_ngrams(sentences, 3),
                                      Smoothing::interpolated({0.1, 0.2, 0.7}));
      const NGramModel uni = estimate(count_ngrams(sentences, 1),
                                      Smoothing::interpolated({1.0}));
      const double p3 = perplexity(tri, sentences).perplexity;
      const double p1 = perplexity(uni, sentences).perplexity;
      CHECK(p3 <= p1 * (1.0 + 1e-6));
    }
  }
}

TEST_CASE("arpa round trip") {
  Rng rng(53);
  const Sentences sentences = random_sentences(rng, 20, 4);
  const NGramModel model =
      estimate(count_ngrams(sentences, 3), Smoothing::laplace());
  const auto dir = temp_dir();
  const auto path = dir / "model.arpa";
  write_arpa(model, path);
  const NGramModel back = read_arpa(path);
  CHECK(back.order == model.order);
  CHECK(back.vocab == model.vocab);
  for (int k = 0; k < model.order; ++k) {
    REQUIRE(back.tables[k].size() == model.tables[k].size());
    for (std::size_t i = 0; i < model.tables[k].size(); ++i) {
      CHECK(back.tables[k][i] ==
            doctest::Approx(model.tables[k][i]).epsilon(1e-6));
    }
  }

  SUBCASE("perplexity is preserved within 1e-5 relative") {
    const Sentences heldout = random_sentences(rng, 5, 4);
    const double a = perplexity(model, heldout).perplexity;
    const double b = perplexity(back, heldout).perplexity;
    CHECK(std::abs(a - b) / a < 1e-5);
  }

  SUBCASE("declared count mismatch is rejected") {
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    const auto pos = text.find("ngram 1=");
    text.replace(pos, std::string("ngram 1=5").size(), "ngram 1=9");
    const auto bad = dir / "bad.arpa";
    std::ofstream out(bad);
    out << text;
    out.close();
    CHECK_THROWS_AS(read_arpa(bad), CorruptLmFile);
  }
}

TEST_CASE("binary lm round trip") {
  Rng rng(59);
  const auto dir = temp_dir();
  for (const int order : {1, 2, 3}) {
    const Sentences sentences = random_sentences(rng, 15, 3);
    const NGramModel model =
        estimate(count_ngrams(sentences, order), Smoothing::additive(0.5));
    const auto path = dir / ("model" + std::to_string(order) + ".bin");
    write_binary(model, path);
    const NGramModel once = read_binary(path);

    // value round trip through the float32 file is within quantization
    for (int k = 0; k < order; ++k) {
      for (std::size_t i = 0; i < model.tables[k].size(); ++i) {
        CHECK(once.tables[k][i] ==
              doctest::Approx(model.tables[k][i]).epsilon(1e-6));
      }
    }

    // the file is a fixpoint: write(read(f)) == f and re-reading is
    // bit-identical
    const auto path2 = dir / "again.bin";
    write_binary(once, path2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::stringstream b1, b2;
    b1 << f1.rdbuf();
    b2 << f2.rdbuf();
    CHECK(b1.str() == b2.str());
    const NGramModel twice = read_binary(path2);
    for (int k = 0; k < order; ++k) {
      CHECK(twice.tables[k] == once.tables[k]);
    }
  }

  SUBCASE("bad magic is rejected") {
    const auto path = dir / "corrupt.bin";
    std::ofstream out(path, std::ios::binary);
    out << "XXXX" << std::string(64, '\0');
    out.close();
    CHECK_THROWS_AS(read_binary(path), CorruptLmFile);
  }

  SUBCASE("truncation is rejected") {
    const Sentences sentences = random_sentences(rng, 5, 3);
    const NGramModel model =
        estimate(count_ngrams(sentences, 2), Smoothing::laplace());
    const auto path = dir / "trunc.bin";
    write_binary(model, path);
    std::filesystem::resize_file(path,
                                 std::filesystem::file_size(path) - 5);
    CHECK_THROWS_AS(read_binary(path), CorruptLmFile);
  }
}

TEST_CASE("determinism: identical corpus gives identical binary bytes") {
  Rng rng1(61), rng2(61);
  const Sentences s1 = random_sentences(rng1, 25, 5);
  const Sentences s2 = random_sentences(rng2, 25, 5);
  REQUIRE(s1 == s2);
  const auto dir = temp_dir();
  const auto p1 = dir / "det1.bin", p2 = dir / "det2.bin";
  write_binary(estimate(count_ngrams(s1, 3), Smoothing::laplace()), p1);
  write_binary(estimate(count_ngrams(s2, 3), Smoothing::laplace()), p2);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::stringstream b1, b2;
  b1 << f1.rdbuf();
  b2 << f2.rdbuf();
  CHECK(b1.str() == b2.str());
}
