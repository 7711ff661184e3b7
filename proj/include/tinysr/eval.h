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

#ifndef TINYSR_EVAL_H_
#define TINYSR_EVAL_H_

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "tinysr/corpus.h"

namespace tinysr {

enum class EditOp { kMatch, kSubstitution, kDeletion, kInsertion };

struct Alignment {
  struct Step {
    EditOp op;
    std::string ref;  // empty for insertions
    std::string hyp;  // empty for deletions
  };
  std::vector<Step> steps;
  int n = 0;  // reference length = h + s + d
  int h = 0;  // matches
  int s = 0;  // substitutions
  int d = 0;  // deletions
  int i = 0;  // insertions
};

// Removes filler tokens (++...++) and sentence/silence markers before
// scoring. When fillers is non-null its tokens are stripped as well.
std::vector<std::string> strip_nonscoring(
    const std::vector<std::string>& tokens,
    const FillerDictionary* fillers = nullptr);

// Minimum-edit-distance alignment with unit costs; ties in the
// backtrace prefer matches, then substitutions, then deletions, then
// insertions.
Alignment align(const std::vector<std::string>& ref,
                const std::vector<std::string>& hyp);

struct GroupScore {
  long long n = 0, h = 0, s = 0, d = 0, i = 0;
  long long sentences = 0;
  long long sentence_errors = 0;

  double percent_correct() const;   // 100 * H / N
  double percent_accuracy() const;  // 100 * (H - I) / N
  double percent_ser() const;       // 100 * error sentences / sentences
};

struct ScoreReport {
  std::map<std::string, GroupScore> groups;
  GroupScore total;
};

// Pools raw counts per group and overall. Throws EmptyTestSet if pairs
// is empty.
ScoreReport score(
    const std::vector<std::tuple<std::vector<std::string>,
                                 std::vector<std::string>, std::string>>&
        pairs);

// Fixed-width table with rows per group plus Total and columns
// % Correct / % Accuracy / % SER.
std::string render_report(const ScoreReport& report);

// One JSON record per group (and "Total") with raw counts and
// percentages.
std::string report_to_json(const ScoreReport& report);

}  // namespace tinysr

#endif  // TINYSR_EVAL_H_
