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

#ifndef TINYSR_TOY_CORPUS_H_
#define TINYSR_TOY_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <string>

namespace tinysr {

// Seeded synthetic corpus: a 5-word vocabulary over tone-pattern phones
// (each phone a distinct band-limited two-tone stack with per-instance
// variant modes and per-speaker gain/shift), non-speech fillers injected
// between words, and silence at utterance edges. Writes wav/, etc/ in
// the eight-file corpus layout, and a ready-to-run config file.
struct ToyCorpusOptions {
  std::filesystem::path out_dir;
  std::string name = "toy";
  int num_train = 300;
  int num_test = 50;
  std::uint64_t seed = 1;
};

void make_toy_corpus(const ToyCorpusOptions& options);

}  // namespace tinysr

#endif  // TINYSR_TOY_CORPUS_H_
