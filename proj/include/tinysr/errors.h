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

#ifndef TINYSR_ERRORS_H_
#define TINYSR_ERRORS_H_

#include <stdexcept>
#include <string>

namespace tinysr {

// Base class for all toolkit errors. Every error message names the
// offending file, line, utterance or token where one exists.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TINYSR_DECLARE_ERROR(name)       \
  class name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

// Front end.
TINYSR_DECLARE_ERROR(BadWavFormat);
TINYSR_DECLARE_ERROR(BadSampleRate);
TINYSR_DECLARE_ERROR(WaveTooShort);
TINYSR_DECLARE_ERROR(CorruptFeatFile);

// Corpus files.
TINYSR_DECLARE_ERROR(ParseError);
TINYSR_DECLARE_ERROR(UnknownPhone);
TINYSR_DECLARE_ERROR(UnknownToken);

// Language model.
TINYSR_DECLARE_ERROR(EmptyCorpus);
TINYSR_DECLARE_ERROR(OovToken);
TINYSR_DECLARE_ERROR(CorruptLmFile);

// Acoustic model and training.
TINYSR_DECLARE_ERROR(CorruptModelFile);
TINYSR_DECLARE_ERROR(NoTrainingData);
TINYSR_DECLARE_ERROR(UtteranceTooShort);
TINYSR_DECLARE_ERROR(BadSchedule);

// Decoder.
TINYSR_DECLARE_ERROR(MissingPronunciation);
TINYSR_DECLARE_ERROR(EmptyFeatures);
TINYSR_DECLARE_ERROR(NoSurvivingPath);

// Scoring.
TINYSR_DECLARE_ERROR(EmptyTestSet);

// Configuration.
TINYSR_DECLARE_ERROR(BadConfig);

#undef TINYSR_DECLARE_ERROR

}  // namespace tinysr

#endif  // TINYSR_ERRORS_H_
