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

#include "tinysr/eval.h"

#include <algorithm>
#include <cstdio>

#include "tinysr/decoder.h"
#include "tinysr/errors.h"
#include "tinysr/ngram.h"

namespace tinysr {

std::vector<std::string> strip_nonscoring(
    const std::vector<std::string>& tokens, const FillerDictionary* fillers) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) {
    if (is_filler_token(token)) continue;
    if (token == kSilToken || token == kSentenceStart ||
        token == kSentenceEnd) {
      continue;
    }
    if (fillers != nullptr && fillers->contains(token)) continue;
    out.push_back(token);
  }
  return out;
}

Alignment align(const std::vector<std::string>& ref,
                const std::vector<std::string>& hyp) {
  const int n = static_cast<int>(ref.size());
  const int m = static_cast<int>(hyp.size());
  // cost[i][j]: minimum edits aligning ref[0..i) with hyp[0..j).
  std::vector<int> cost(static_cast<std::size_t>(n + 1) * (m + 1));
  const auto at = [m](int i, int j) {
    return static_cast<std::size_t>(i) * (m + 1) + j;
  };
  for (int i = 0; i <= n; ++i) cost[at(i, 0)] = i;
  for (int j = 0; j <= m; ++j) cost[at(0, j)] = j;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= m; ++j) {
      const int sub = cost[at(i - 1, j - 1)] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const int del = cost[at(i - 1, j)] + 1;
      const int ins = cost[at(i, j - 1)] + 1;
      cost[at(i, j)] = std::min({sub, del, ins});
    }
  }

  Alignment result;
  result.n = n;
  // Backtrace preferring match, then substitution, deletion, insertion.
  int i = n, j = m;
  std::vector<Alignment::Step> steps;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] &&
        cost[at(i, j)] == cost[at(i - 1, j - 1)]) {
      steps.push_back({EditOp::kMatch, ref[i - 1], hyp[j - 1]});
      --i;
      --j;
    } else if (i > 0 && j > 0 && cost[at(i, j)] == cost[at(i - 1, j - 1)] + 1 &&
               ref[i - 1] != hyp[j - 1]) {
      steps.push_back({EditOp::kSubstitution, ref[i - 1], hyp[j - 1]});
      --i;
      --j;
    } else if (i > 0 && cost[at(i, j)] == cost[at(i - 1, j)] + 1) {
      steps.push_back({EditOp::kDeletion, ref[i - 1], ""});
      --i;
    } else {
      steps.push_back({EditOp::kInsertion, "", hyp[j - 1]});
      --j;
    }
  }
  std::reverse(steps.begin(), steps.end());
  result.steps = std::move(steps);
  for (const auto& step : result.steps) {
    switch (step.op) {
      case EditOp::kMatch: ++result.h; break;
      case EditOp::kSubstitution: ++result.s; break;
      case EditOp::kDeletion: ++result.d; break;
      case EditOp::kInsertion: ++result.i; break;
    }
  }
  return result;
}

double GroupScore::percent_correct() const {
  return n == 0 ? 0.0 : 100.0 * static_cast<double>(h) / static_cast<double>(n);
}

double GroupScore::percent_accuracy() const {
  return n == 0 ? 0.0
               : 100.0 * static_cast<double>(h - i) / static_cast<double>(n);
}

double GroupScore::percent_ser() const {
  return sentences == 0 ? 0.0
                        : 100.0 * static_cast<double>(sentence_errors) /
                              static_cast<double>(sentences);
}

ScoreReport score(
    const std::vector<std::tuple<std::vector<std::string>,
                                 std::vector<std::string>, std::string>>&
        pairs) {
  if (pairs.empty()) throw EmptyTestSet("no reference/hypothesis pairs");
  ScoreReport report;
  for (const auto& [ref, hyp, group] : pairs) {
    const Alignment a = align(ref, hyp);
    GroupScore& g = report.groups[group];
    for (GroupScore* dst : {&g, &report.total}) {
      dst->n += a.n;
      dst->h += a.h;
      dst->s += a.s;
      dst->d += a.d;
      dst->i += a.i;
      dst->sentences += 1;
      dst->sentence_errors += (a.s + a.d + a.i) > 0 ? 1 : 0;
    }
  }
  return report;
}

namespace {

void append_row(std::string& out, const std::string& name,
                const GroupScore& g) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-12s %9.2f %10.2f %8.2f   %6lld %6lld %5lld %5lld %5lld\n",
                name.c_str(), g.percent_correct(), g.percent_accuracy(),
                g.percent_ser(), g.n, g.h, g.s, g.d, g.i);
  out += buf;
}

}  // namespace

std::string render_report(const ScoreReport& report) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-12s %9s %10s %8s   %6s %6s %5s %5s %5s\n",
                "SPEAKER", "% Correct", "% Accuracy", "% SER", "N", "H", "S",
                "D", "I");
  out += buf;
  for (const auto& [name, g] : report.groups) append_row(out, name, g);
  append_row(out, "Total", report.total);
  return out;
}

namespace {

void append_json_record(std::string& out, const std::string& name,
                        const GroupScore& g, bool last) {
  char buf[512];
  std::snprintf(
      buf, sizeof(buf),
      "  {\"group\": \"%s\", \"n\": %lld, \"h\": %lld, \"s\": %lld, "
      "\"d\": %lld, \"i\": %lld, \"sentences\": %lld, "
      "\"sentence_errors\": %lld, \"percent_correct\": %.6f, "
      "\"percent_accuracy\": %.6f, \"percent_ser\": %.6f}%s\n",
      name.c_str(), g.n, g.h, g.s, g.d, g.i, g.sentences, g.sentence_errors,
      g.percent_correct(), g.percent_accuracy(), g.percent_ser(),
      last ? "" : ",");
  out += buf;
}

}  // namespace

std::string report_to_json(const ScoreReport& report) {
  std::string out = "[\n";
  for (const auto& [name, g] : report.groups) {
    append_json_record(out, name, g, false);
  }
  append_json_record(out, "Total", report.total, true);
  out += "]\n";
  return out;
}

}  // namespace tinysr
