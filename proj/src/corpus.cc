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

#include "tinysr/corpus.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "tinysr/errors.h"

namespace tinysr {
namespace {

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    std::size_t j = i;
    while (j < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[j])))
      ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

// Strips trailing '\r' and a '#' comment; returns the remaining line.
std::string strip_line(std::string line, bool allow_comment) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (allow_comment) {
    const auto pos = line.find('#');
    if (pos != std::string::npos) line.erase(pos);
  }
  return line;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

bool is_filler_token(std::string_view token) {
  return token.size() >= 5 && token.substr(0, 2) == "++" &&
         token.substr(token.size() - 2) == "++";
}

PhoneSet PhoneSet::parse(const std::string& text) {
  PhoneSet ps;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(strip_line(line, true));
    if (tokens.empty()) continue;
    if (tokens.size() != 1) {
      throw ParseError("phone file line " + std::to_string(line_no) +
                       ": expected one phone per line");
    }
    if (!seen.insert(tokens[0]).second) {
      throw ParseError("phone file line " + std::to_string(line_no) +
                       ": duplicate phone " + tokens[0]);
    }
    ps.phones.push_back(tokens[0]);
  }
  return ps;
}

bool PhoneSet::contains(const std::string& phone) const {
  return std::find(phones.begin(), phones.end(), phone) != phones.end();
}

std::string PhoneSet::to_text() const {
  std::string out;
  for (const auto& p : phones) {
    out += p;
    out += '\n';
  }
  return out;
}

PronunciationDictionary PronunciationDictionary::parse(
    const std::string& text) {
  // Collect (word, alternative index, phones) then assemble so the
  // alternative index ordering is preserved regardless of line order.
  std::map<std::string, std::map<int, std::vector<std::string>>> raw;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(strip_line(line, false));
    if (tokens.empty()) continue;
    if (tokens.size() < 2) {
      throw ParseError("dictionary line " + std::to_string(line_no) +
                       ": entry \"" + tokens[0] + "\" has no phones");
    }
    std::string word = tokens[0];
    int alt = 1;
    const auto paren = word.find('(');
    if (paren != std::string::npos) {
      if (word.back() != ')' || paren + 2 > word.size() - 1) {
        throw ParseError("dictionary line " + std::to_string(line_no) +
                         ": malformed alternative suffix in \"" + word + "\"");
      }
      const std::string idx = word.substr(paren + 1, word.size() - paren - 2);
      try {
        alt = std::stoi(idx);
      } catch (const std::exception&) {
        throw ParseError("dictionary line " + std::to_string(line_no) +
                         ": non-numeric alternative index in \"" + word +
                         "\"");
      }
      if (alt < 2) {
        throw ParseError("dictionary line " + std::to_string(line_no) +
                         ": alternative index must be >= 2 in \"" + word +
                         "\"");
      }
      word.erase(paren);
    }
    auto& alts = raw[word];
    if (!alts.emplace(alt, std::vector<std::string>(tokens.begin() + 1,
                                                    tokens.end()))
             .second) {
      throw ParseError("dictionary line " + std::to_string(line_no) +
                       ": duplicate entry for \"" + tokens[0] + "\"");
    }
  }

  PronunciationDictionary dict;
  for (auto& [word, alts] : raw) {
    int expected = 1;
    auto& prons = dict.entries[word];
    for (auto& [idx, phones] : alts) {
      if (idx != expected) {
        throw ParseError("dictionary entry \"" + word +
                         "\": alternative indices must be contiguous from "
                         "the base entry (missing index " +
                         std::to_string(expected) + ")");
      }
      prons.push_back(std::move(phones));
      ++expected;
    }
  }
  return dict;
}

std::string PronunciationDictionary::to_text() const {
  std::string out;
  for (const auto& [word, prons] : entries) {
    for (std::size_t a = 0; a < prons.size(); ++a) {
      out += word;
      if (a > 0) out += "(" + std::to_string(a + 1) + ")";
      for (const auto& phone : prons[a]) {
        out += ' ';
        out += phone;
      }
      out += '\n';
    }
  }
  return out;
}

FillerDictionary FillerDictionary::parse(const std::string& text) {
  FillerDictionary fd;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(strip_line(line, true));
    if (tokens.empty()) continue;
    if (tokens.size() != 2) {
      throw ParseError("filler file line " + std::to_string(line_no) +
                       ": expected `++TAG++ PHONE`");
    }
    if (!is_filler_token(tokens[0])) {
      throw ParseError("filler file line " + std::to_string(line_no) +
                       ": token \"" + tokens[0] +
                       "\" must start and end with ++");
    }
    if (!fd.entries.emplace(tokens[0], tokens[1]).second) {
      throw ParseError("filler file line " + std::to_string(line_no) +
                       ": duplicate filler token " + tokens[0]);
    }
  }
  return fd;
}

std::string FillerDictionary::to_text() const {
  std::string out;
  for (const auto& [token, phone] : entries) {
    out += token;
    out += ' ';
    out += phone;
    out += '\n';
  }
  return out;
}

std::vector<TranscriptSet::Utterance> TranscriptSet::parse_transcriptions(
    const std::string& text) {
  std::vector<Utterance> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_line(line, false);
    if (split_ws(line).empty()) continue;
    const auto close = line.rfind(')');
    const auto open = line.rfind('(');
    if (open == std::string::npos || close == std::string::npos ||
        close < open || !split_ws(line.substr(close + 1)).empty()) {
      throw ParseError("transcription line " + std::to_string(line_no) +
                       ": missing trailing (utterance_id)");
    }
    Utterance utt;
    utt.id = line.substr(open + 1, close - open - 1);
    if (utt.id.empty()) {
      throw ParseError("transcription line " + std::to_string(line_no) +
                       ": empty utterance id");
    }
    utt.tokens = split_ws(line.substr(0, open));
    out.push_back(std::move(utt));
  }
  return out;
}

std::vector<std::string> TranscriptSet::parse_fileids(
    const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto tokens = split_ws(strip_line(line, false));
    if (tokens.empty()) continue;
    out.push_back(tokens[0]);
  }
  return out;
}

std::string TranscriptSet::transcriptions_to_text(
    const std::vector<Utterance>& utterances) {
  std::string out;
  for (const auto& utt : utterances) {
    for (const auto& token : utt.tokens) {
      out += token;
      out += ' ';
    }
    out += "(" + utt.id + ")\n";
  }
  return out;
}

std::string TranscriptSet::fileids_to_text(
    const std::vector<std::string>& fileids) {
  std::string out;
  for (const auto& id : fileids) {
    out += id;
    out += '\n';
  }
  return out;
}

CorpusManifest load_manifest(const std::filesystem::path& etc_dir,
                             const std::string& name,
                             const std::filesystem::path& wav_dir,
                             const std::filesystem::path& feat_dir) {
  CorpusManifest m;
  m.phone_set = PhoneSet::parse(read_file(etc_dir / (name + ".phone")));
  m.dictionary =
      PronunciationDictionary::parse(read_file(etc_dir / (name + ".dic")));
  m.fillers = FillerDictionary::parse(read_file(etc_dir / (name + ".filler")));
  m.train.utterances = TranscriptSet::parse_transcriptions(
      read_file(etc_dir / (name + "_train.transcription")));
  m.train.fileids = TranscriptSet::parse_fileids(
      read_file(etc_dir / (name + "_train.fileids")));
  m.test.utterances = TranscriptSet::parse_transcriptions(
      read_file(etc_dir / (name + "_test.transcription")));
  m.test.fileids = TranscriptSet::parse_fileids(
      read_file(etc_dir / (name + "_test.fileids")));
  m.wav_dir = wav_dir;
  m.feat_dir = feat_dir;
  return m;
}

namespace {

void validate_transcript_set(const CorpusManifest& manifest,
                             const TranscriptSet& ts, const std::string& name,
                             const ValidationOptions& options,
                             ValidationReport& report) {
  if (ts.utterances.size() != ts.fileids.size()) {
    report.errors.push_back(
        name + ": fileids has " + std::to_string(ts.fileids.size()) +
        " entries but transcription has " +
        std::to_string(ts.utterances.size()));
  }
  const std::size_t n = std::min(ts.utterances.size(), ts.fileids.size());
  for (std::size_t i = 0; i < n; ++i) {
    // fileids are relative paths; the utterance id is the basename.
    const std::string base =
        std::filesystem::path(ts.fileids[i]).filename().string();
    if (base != ts.utterances[i].id) {
      report.errors.push_back(name + ": entry " + std::to_string(i + 1) +
                              ": fileid \"" + ts.fileids[i] +
                              "\" does not correspond to utterance id \"" +
                              ts.utterances[i].id + "\"");
    }
  }
  for (const auto& utt : ts.utterances) {
    if (utt.tokens.empty()) {
      report.warnings.push_back(name + ": utterance " + utt.id +
                                " has no tokens");
    }
    for (const auto& token : utt.tokens) {
      if (is_filler_token(token)) {
        if (!manifest.fillers.contains(token)) {
          report.errors.push_back(name + ": utterance " + utt.id +
                                  ": filler token " + token +
                                  " not in filler dictionary");
        }
      } else if (!manifest.dictionary.contains(token)) {
        report.errors.push_back(name + ": utterance " + utt.id +
                                ": out-of-dictionary token " + token);
      }
    }
  }
  for (std::size_t i = 0; i < ts.fileids.size(); ++i) {
    if (options.check_wav_files) {
      const auto wav = manifest.wav_dir / (ts.fileids[i] + ".wav");
      if (!std::filesystem::exists(wav)) {
        report.errors.push_back(name + ": missing audio file " + wav.string());
      }
    }
    if (options.check_feat_files) {
      const auto feat = manifest.feat_dir / (ts.fileids[i] + ".feat");
      if (!std::filesystem::exists(feat)) {
        report.errors.push_back(name + ": missing feature file " +
                                feat.string());
      }
    }
  }
}

}  // namespace

ValidationReport validate_corpus(const CorpusManifest& manifest,
                                 const ValidationOptions& options) {
  ValidationReport report;

  if (!manifest.phone_set.contains(kSilencePhone)) {
    report.errors.push_back(std::string("phone set: missing silence phone ") +
                            kSilencePhone);
  }
  for (const auto& [word, prons] : manifest.dictionary.entries) {
    for (const auto& pron : prons) {
      for (const auto& phone : pron) {
        if (!manifest.phone_set.contains(phone)) {
          report.errors.push_back("dictionary: word " + word +
                                  " uses phone " + phone +
                                  " outside the phone set");
        }
      }
    }
  }
  // Filler phones must be in the phone set and, except SIL, must not be
  // used by regular words.
  std::set<std::string> word_phones;
  for (const auto& [word, prons] : manifest.dictionary.entries) {
    for (const auto& pron : prons) word_phones.insert(pron.begin(), pron.end());
  }
  for (const auto& [token, phone] : manifest.fillers.entries) {
    if (!manifest.phone_set.contains(phone)) {
      report.errors.push_back("filler dictionary: " + token + " uses phone " +
                              phone + " outside the phone set");
    }
    if (phone != kSilencePhone && word_phones.count(phone) != 0) {
      report.errors.push_back("filler dictionary: " + token +
                              " shares phone " + phone +
                              " with a regular word");
    }
  }

  validate_transcript_set(manifest, manifest.train, "train", options, report);
  validate_transcript_set(manifest, manifest.test, "test", options, report);

  std::set<std::string> train_ids;
  for (const auto& utt : manifest.train.utterances) train_ids.insert(utt.id);
  for (const auto& utt : manifest.test.utterances) {
    if (train_ids.count(utt.id) != 0) {
      report.errors.push_back("utterance id " + utt.id +
                              " appears in both train and test sets");
    }
  }
  return report;
}

std::string ValidationReport::to_text() const {
  std::string out;
  for (const auto& e : errors) out += "ERROR: " + e + "\n";
  for (const auto& w : warnings) out += "WARNING: " + w + "\n";
  out += "validation: " + std::to_string(errors.size()) + " error(s), " +
         std::to_string(warnings.size()) + " warning(s)\n";
  return out;
}

std::map<std::string, int> count_nonspeech(const TranscriptSet& ts) {
  std::map<std::string, int> counts;
  for (const auto& utt : ts.utterances) {
    for (const auto& token : utt.tokens) {
      if (is_filler_token(token)) ++counts[token];
    }
  }
  return counts;
}

}  // namespace tinysr
