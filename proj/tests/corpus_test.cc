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

#include <map>
#include <string>
#include <vector>

#include "tinysr/corpus.h"
#include "tinysr/errors.h"
#include "tinysr/rng.h"

using namespace tinysr;

namespace {

CorpusManifest toy_manifest() {
  CorpusManifest m;
  m.phone_set = PhoneSet::parse("SIL\nA\nB\nC\nFP\n");
  m.dictionary = PronunciationDictionary::parse("ABC A B C\nCAB C A B\n");
  m.fillers = FillerDictionary::parse("++FP++ FP\n");
  m.train.utterances = TranscriptSet::parse_transcriptions(
      "ABC ++FP++ CAB (u001)\nCAB (u002)\n");
  m.train.fileids = TranscriptSet::parse_fileids("u001\nu002\n");
  m.test.utterances =
      TranscriptSet::parse_transcriptions("ABC (u003)\n");
  m.test.fileids = TranscriptSet::parse_fileids("u003\n");
  return m;
}

}  // namespace

TEST_CASE("filler token shape") {
  CHECK(is_filler_token("++FP++"));
  CHECK(is_filler_token("++NOISE++"));
  CHECK_FALSE(is_filler_token("FP"));
  CHECK_FALSE(is_filler_token("++++"));  // no tag between the markers
  CHECK_FALSE(is_filler_token("+FP+"));
}

TEST_CASE("dictionary parsing") {
  SUBCASE("single well-formed line") {
    const auto dict = PronunciationDictionary::parse("ABC A B C\n");
    REQUIRE(dict.contains("ABC"));
    CHECK(dict.entries.at("ABC") ==
          std::vector<std::vector<std::string>>{{"A", "B", "C"}});
  }

  SUBCASE("alternatives keep their index order") {
    const auto dict =
        PronunciationDictionary::parse("ABC A B C\nABC(2) A B\n");
    REQUIRE(dict.entries.at("ABC").size() == 2);
    CHECK(dict.entries.at("ABC")[0] ==
          std::vector<std::string>{"A", "B", "C"});
    CHECK(dict.entries.at("ABC")[1] == std::vector<std::string>{"A", "B"});
  }

  SUBCASE("entry without phones is a parse error") {
    CHECK_THROWS_AS(PronunciationDictionary::parse("ABC\n"), ParseError);
  }

  SUBCASE("gapped alternative index is a parse error") {
    CHECK_THROWS_AS(PronunciationDictionary::parse("ABC A\nABC(3) B\n"),
                    ParseError);
  }

  SUBCASE("alternative order in the file does not matter") {
    const auto dict =
        PronunciationDictionary::parse("ABC(2) A B\nABC A B C\n");
    CHECK(dict.entries.at("ABC")[0] ==
          std::vector<std::string>{"A", "B", "C"});
  }
}

TEST_CASE("transcription parsing") {
  SUBCASE("tokens plus trailing id") {
    const auto utts = TranscriptSet::parse_transcriptions(
        "HELLO ++FP++ WORLD (u001)\n");
    REQUIRE(utts.size() == 1);
    CHECK(utts[0].id == "u001");
    CHECK(utts[0].tokens ==
          std::vector<std::string>{"HELLO", "++FP++", "WORLD"});
  }

  SUBCASE("empty token list is allowed") {
    const auto utts = TranscriptSet::parse_transcriptions("(u002)\n");
    REQUIRE(utts.size() == 1);
    CHECK(utts[0].id == "u002");
    CHECK(utts[0].tokens.empty());
  }

  SUBCASE("missing id is a parse error") {
    CHECK_THROWS_AS(TranscriptSet::parse_transcriptions("HELLO WORLD\n"),
                    ParseError);
  }
}

TEST_CASE("phone set parsing") {
  const auto ps = PhoneSet::parse("# comment\nSIL\nA\nB # trailing comment\n");
  CHECK(ps.phones == std::vector<std::string>{"SIL", "A", "B"});
  CHECK(ps.contains("SIL"));
  CHECK_FALSE(ps.contains("Z"));
  CHECK_THROWS_AS(PhoneSet::parse("A\nA\n"), ParseError);
}

TEST_CASE("filler dictionary parsing") {
  const auto fd = FillerDictionary::parse("++FP++ FP\n++BR++ BR\n");
  CHECK(fd.entries.at("++FP++") == "FP");
  CHECK_THROWS_AS(FillerDictionary::parse("FP FP\n"), ParseError);
  CHECK_THROWS_AS(FillerDictionary::parse("++FP++\n"), ParseError);
}

TEST_CASE("parse / serialize / re-parse is a fixpoint") {
  Rng rng(23);
  const std::vector<std::string> phones = {"A", "B", "C", "D"};
  for (int trial = 0; trial < 20; ++trial) {
    // random dictionary
    PronunciationDictionary dict;
    const int num_words = rng.uniform_int(1, 8);
    for (int w = 0; w < num_words; ++w) {
      const std::string word = "W" + std::to_string(w);
      const int num_prons = rng.uniform_int(1, 3);
      for (int a = 0; a < num_prons; ++a) {
        std::vector<std::string> pron;
        const int len = rng.uniform_int(1, 5);
        for (int i = 0; i < len; ++i) {
          pron.push_back(phones[rng.uniform_int(0, 3)]);
        }
        dict.entries[word].push_back(pron);
      }
    }
    const auto reparsed = PronunciationDictionary::parse(dict.to_text());
    CHECK(reparsed.entries == dict.entries);

    // random transcriptions
    std::vector<TranscriptSet::Utterance> utts;
    const int num_utts = rng.uniform_int(1, 6);
    for (int u = 0; u < num_utts; ++u) {
      TranscriptSet::Utterance utt;
      utt.id = "utt" + std::to_string(u);
      const int len = rng.uniform_int(0, 6);
      for (int i = 0; i < len; ++i) {
        utt.tokens.push_back(rng.bernoulli(0.2)
                                 ? "++FP++"
                                 : "W" + std::to_string(rng.uniform_int(0, 7)));
      }
      utts.push_back(utt);
    }
    const auto text = TranscriptSet::transcriptions_to_text(utts);
    const auto reparsed_utts = TranscriptSet::parse_transcriptions(text);
    REQUIRE(reparsed_utts.size() == utts.size());
    for (std::size_t i = 0; i < utts.size(); ++i) {
      CHECK(reparsed_utts[i].id == utts[i].id);
      CHECK(reparsed_utts[i].tokens == utts[i].tokens);
    }
  }
}

TEST_CASE("validation") {
  SUBCASE("consistent toy manifest is clean") {
    const auto report = validate_corpus(toy_manifest());
    CHECK(report.is_clean());
    CHECK(report.errors.empty());
  }

  SUBCASE("out-of-dictionary token is reported with token and utterance") {
    CorpusManifest m = toy_manifest();
    m.train.utterances[0].tokens.push_back("QQQ");
    const auto report = validate_corpus(m);
    CHECK_FALSE(report.is_clean());
    REQUIRE(report.errors.size() == 1);
    CHECK(report.errors[0].find("QQQ") != std::string::npos);
    CHECK(report.errors[0].find("u001") != std::string::npos);
  }

  SUBCASE("fileid / transcription count mismatch is one finding") {
    CorpusManifest m = toy_manifest();
    m.train.fileids.push_back("u004");
    const auto report = validate_corpus(m);
    CHECK_FALSE(report.is_clean());
    REQUIRE(report.errors.size() == 1);
    CHECK(report.errors[0].find("fileids") != std::string::npos);
  }

  SUBCASE("empty utterance is a warning, not an error") {
    CorpusManifest m = toy_manifest();
    m.train.utterances.push_back({"u005", {}});
    m.train.fileids.push_back("u005");
    const auto report = validate_corpus(m);
    CHECK(report.is_clean());
    CHECK(report.warnings.size() == 1);
  }

  SUBCASE("unknown filler token in a transcript is reported") {
    CorpusManifest m = toy_manifest();
    m.train.utterances[0].tokens.push_back("++ZZ++");
    const auto report = validate_corpus(m);
    CHECK_FALSE(report.is_clean());
    CHECK(report.errors[0].find("++ZZ++") != std::string::npos);
  }

  SUBCASE("phone outside the phone set is reported") {
    CorpusManifest m = toy_manifest();
    m.dictionary.entries["ABC"][0].push_back("ZZ");
    const auto report = validate_corpus(m);
    CHECK_FALSE(report.is_clean());
  }

  SUBCASE("train/test id overlap is reported") {
    CorpusManifest m = toy_manifest();
    m.test.utterances[0].id = "u001";
    m.test.fileids[0] = "u001";
    const auto report = validate_corpus(m);
    CHECK_FALSE(report.is_clean());
  }

  SUBCASE("missing silence phone is reported") {
    CorpusManifest m = toy_manifest();
    m.phone_set = PhoneSet::parse("A\nB\nC\nFP\n");
    const auto report = validate_corpus(m);
    CHECK_FALSE(report.is_clean());
  }

  SUBCASE("validation is idempotent") {
    const CorpusManifest m = toy_manifest();
    const auto a = validate_corpus(m);
    const auto b = validate_corpus(m);
    CHECK(a.errors == b.errors);
    CHECK(a.warnings == b.warnings);
  }
}

TEST_CASE("count_nonspeech") {
  SUBCASE("two utterances with one ++FP++ each") {
    TranscriptSet ts;
    ts.utterances = TranscriptSet::parse_transcriptions(
        "A ++FP++ B (u1)\n++FP++ (u2)\n");
    const auto counts = count_nonspeech(ts);
    REQUIRE(counts.size() == 1);
    CHECK(counts.at("++FP++") == 2);
  }

  SUBCASE("random transcripts match a naive recount") {
    Rng rng(29);
    const std::vector<std::string> inventory = {"++FP++", "++BR++", "++HES++",
                                                "WORD1", "WORD2"};
    TranscriptSet ts;
    for (int u = 0; u < 50; ++u) {
      TranscriptSet::Utterance utt;
      utt.id = "u" + std::to_string(u);
      const int len = rng.uniform_int(0, 10);
      for (int i = 0; i < len; ++i) {
        utt.tokens.push_back(inventory[rng.uniform_int(0, 4)]);
      }
      ts.utterances.push_back(utt);
    }
    // independent full-scan recount
    std::map<std::string, int> expected;
    for (const auto& utt : ts.utterances) {
      for (const auto& token : utt.tokens) {
        if (token.size() >= 5 && token.substr(0, 2) == "++" &&
            token.substr(token.size() - 2) == "++") {
          ++expected[token];
        }
      }
    }
    CHECK(count_nonspeech(ts) == expected);
  }
}
