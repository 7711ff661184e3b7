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

#ifndef TINYSR_TEXT_NORM_H_
#define TINYSR_TEXT_NORM_H_

#include <string>
#include <utility>
#include <vector>

namespace tinysr {

// Text cleanup rules: punctuation to strip, sentence terminators, and a
// data-driven number lexicon so any language can supply its own digit
// expansions. The lexicon must cover at least the single digits 0-9.
struct NormalizationRules {
  std::string punctuation = ",;:\"'()[]{}<>-_/\\*&%$@~`|+=^";
  std::string sentence_terminators = ".!?";
  // digit-string pattern -> expansion words; matched longest-first with
  // digit-by-digit fallback.
  std::vector<std::pair<std::string, std::vector<std::string>>> number_lexicon;

  static NormalizationRules defaults();

  // Rules file: `punctuation <chars>`, `terminators <chars>`,
  // `number <digits> WORD...` lines; '#' comments.
  static NormalizationRules parse(const std::string& text);
  std::string to_text() const;

  // Throws BadConfig unless digits 0-9 are all covered.
  void validate() const;
};

// Splits raw text at sentence terminators, removes punctuation, expands
// maximal digit runs through the number lexicon, tokenizes on
// whitespace, and drops empty sentences. Deterministic left-to-right.
std::vector<std::vector<std::string>> clean_text(
    const std::string& raw, const NormalizationRules& rules);

}  // namespace tinysr

#endif  // TINYSR_TEXT_NORM_H_
