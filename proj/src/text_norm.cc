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

#include "tinysr/text_norm.h"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "tinysr/errors.h"

namespace tinysr {

NormalizationRules NormalizationRules::defaults() {
  NormalizationRules rules;
  rules.number_lexicon = {
      {"0", {"ZERO"}}, {"1", {"ONE"}},   {"2", {"TWO"}},   {"3", {"THREE"}},
      {"4", {"FOUR"}}, {"5", {"FIVE"}},  {"6", {"SIX"}},   {"7", {"SEVEN"}},
      {"8", {"EIGHT"}}, {"9", {"NINE"}},
  };
  return rules;
}

NormalizationRules NormalizationRules::parse(const std::string& text) {
  NormalizationRules rules;
  rules.punctuation.clear();
  rules.sentence_terminators.clear();
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "punctuation") {
      ls >> rules.punctuation;
    } else if (key == "terminators") {
      ls >> rules.sentence_terminators;
    } else if (key == "number") {
      std::string pattern;
      if (!(ls >> pattern) ||
          !std::all_of(pattern.begin(), pattern.end(),
                       [](char c) { return std::isdigit(
                           static_cast<unsigned char>(c)); })) {
        throw ParseError("rules line " + std::to_string(line_no) +
                         ": `number` needs a digit pattern");
      }
      std::vector<std::string> expansion;
      std::string word;
      while (ls >> word) expansion.push_back(word);
      if (expansion.empty()) {
        throw ParseError("rules line " + std::to_string(line_no) +
                         ": `number " + pattern + "` has no expansion");
      }
      rules.number_lexicon.emplace_back(pattern, std::move(expansion));
    } else {
      throw ParseError("rules line " + std::to_string(line_no) +
                       ": unknown key \"" + key + "\"");
    }
  }
  rules.validate();
  return rules;
}

std::string NormalizationRules::to_text() const {
  std::string out;
  out += "punctuation " + punctuation + "\n";
  out += "terminators " + sentence_terminators + "\n";
  for (const auto& [pattern, expansion] : number_lexicon) {
    out += "number " + pattern;
    for (const auto& w : expansion) out += " " + w;
    out += "\n";
  }
  return out;
}

void NormalizationRules::validate() const {
  for (char d = '0'; d <= '9'; ++d) {
    const std::string single(1, d);
    const bool covered =
        std::any_of(number_lexicon.begin(), number_lexicon.end(),
                    [&](const auto& e) { return e.first == single; });
    if (!covered) {
      throw BadConfig("number lexicon does not cover digit " + single);
    }
  }
}

namespace {

// Expands one maximal digit run, longest lexicon pattern first, falling
// back digit by digit.
void expand_digits(std::string_view run, const NormalizationRules& rules,
                   std::string& out) {
  std::size_t i = 0;
  while (i < run.size()) {
    const std::string_view rest = run.substr(i);
    const std::pair<std::string, std::vector<std::string>>* best = nullptr;
    for (const auto& entry : rules.number_lexicon) {
      if (entry.first.size() <= rest.size() &&
          rest.substr(0, entry.first.size()) == entry.first) {
        if (best == nullptr || entry.first.size() > best->first.size())
          best = &entry;
      }
    }
    // validate() guarantees single digits are covered.
    for (const auto& word : best->second) {
      out += ' ';
      out += word;
    }
    i += best->first.size();
  }
  out += ' ';
}

}  // namespace

std::vector<std::vector<std::string>> clean_text(
    const std::string& raw, const NormalizationRules& rules) {
  std::vector<std::vector<std::string>> sentences;
  std::string current;

  auto flush = [&]() {
    std::vector<std::string> tokens;
    std::istringstream ss(current);
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    if (!tokens.empty()) sentences.push_back(std::move(tokens));
    current.clear();
  };

  std::size_t i = 0;
  while (i < raw.size()) {
    const char c = raw[i];
    if (rules.sentence_terminators.find(c) != std::string::npos) {
      flush();
      ++i;
    } else if (rules.punctuation.find(c) != std::string::npos) {
      current += ' ';
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < raw.size() &&
             std::isdigit(static_cast<unsigned char>(raw[j])))
        ++j;
      expand_digits(std::string_view(raw).substr(i, j - i), rules, current);
      i = j;
    } else if (c == '\n' || c == '\t' || c == '\r') {
      current += ' ';
      ++i;
    } else {
      current += c;
      ++i;
    }
  }
  flush();
  return sentences;
}

}  // namespace tinysr
