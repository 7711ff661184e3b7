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

#ifndef TINYSR_CORPUS_H_
#define TINYSR_CORPUS_H_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tinysr {

inline constexpr const char* kSilencePhone = "SIL";

// True for non-speech event tokens of the form ++TAG++.
bool is_filler_token(std::string_view token);

// One phone symbol per line; '#' starts a comment. Must contain SIL.
struct PhoneSet {
  std::vector<std::string> phones;  // file order, no duplicates

  bool contains(const std::string& phone) const;
  static PhoneSet parse(const std::string& text);
  std::string to_text() const;
};

// Lines `WORD PH1 PH2 ...` with alternatives written `WORD(2) ...`,
// `WORD(3) ...` in increasing order after the base entry.
struct PronunciationDictionary {
  // word -> pronunciations in alternative order (index 0 is the base).
  std::map<std::string, std::vector<std::vector<std::string>>> entries;

  bool contains(const std::string& word) const {
    return entries.count(word) != 0;
  }
  static PronunciationDictionary parse(const std::string& text);
  std::string to_text() const;
};

// Lines `++TAG++ PHONE`, one dedicated phone per filler token.
struct FillerDictionary {
  std::map<std::string, std::string> entries;  // token -> phone

  bool contains(const std::string& token) const {
    return entries.count(token) != 0;
  }
  static FillerDictionary parse(const std::string& text);
  std::string to_text() const;
};

// Transcription lines `TOKEN... (utterance_id)` paired with a fileids
// list of relative audio paths (no extension), one per utterance.
struct TranscriptSet {
  struct Utterance {
    std::string id;
    std::vector<std::string> tokens;
  };
  std::vector<Utterance> utterances;
  std::vector<std::string> fileids;

  static std::vector<Utterance> parse_transcriptions(const std::string& text);
  static std::vector<std::string> parse_fileids(const std::string& text);
  static std::string transcriptions_to_text(
      const std::vector<Utterance>& utterances);
  static std::string fileids_to_text(const std::vector<std::string>& fileids);
};

struct CorpusManifest {
  PhoneSet phone_set;
  PronunciationDictionary dictionary;
  FillerDictionary fillers;
  TranscriptSet train;
  TranscriptSet test;
  std::filesystem::path wav_dir;
  std::filesystem::path feat_dir;
};

// Loads `<name>.phone`, `<name>.dic`, `<name>.filler`,
// `<name>_{train,test}.fileids` and `<name>_{train,test}.transcription`
// from `etc_dir`.
CorpusManifest load_manifest(const std::filesystem::path& etc_dir,
                             const std::string& name,
                             const std::filesystem::path& wav_dir,
                             const std::filesystem::path& feat_dir);

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool is_clean() const { return errors.empty(); }
  std::string to_text() const;
};

struct ValidationOptions {
  bool check_wav_files = false;   // wav_dir/<fileid>.wav exists
  bool check_feat_files = false;  // feat_dir/<fileid>.feat exists
};

// Reports, per category: out-of-dictionary tokens, phones outside the
// phone set, fileid/transcription mismatches, missing audio or feature
// files, and empty utterances (warnings). Never throws.
ValidationReport validate_corpus(const CorpusManifest& manifest,
                                 const ValidationOptions& options = {});

// Exact occurrence counts per filler token across all utterances.
std::map<std::string, int> count_nonspeech(const TranscriptSet& ts);

}  // namespace tinysr

#endif  // TINYSR_CORPUS_H_
