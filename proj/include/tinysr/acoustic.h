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

#ifndef TINYSR_ACOUSTIC_H_
#define TINYSR_ACOUSTIC_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace tinysr {

inline constexpr int kNumEmittingStates = 3;

// Diagonal-covariance Gaussian mixture over feature vectors.
struct GaussianMixture {
  int dim = 0;
  std::vector<double> weights;    // num_components, sums to 1
  std::vector<double> means;      // num_components x dim, row-major
  std::vector<double> variances;  // num_components x dim, >= floor

  int num_components() const { return static_cast<int>(weights.size()); }
  std::span<const double> mean(int c) const {
    return {means.data() + static_cast<std::size_t>(c) * dim,
            static_cast<std::size_t>(dim)};
  }
  std::span<const double> variance(int c) const {
    return {variances.data() + static_cast<std::size_t>(c) * dim,
            static_cast<std::size_t>(dim)};
  }
};

// Three-state left-to-right HMM with self-loop and forward transitions
// only (no skips). forward[2] is the exit probability. Emitting states
// reference the model's shared state pool so triphones can tie to the
// states of their base phone.
struct PhoneHmm {
  std::string label;
  std::array<double, kNumEmittingStates> self_loop{0.5, 0.5, 0.5};
  std::array<double, kNumEmittingStates> forward{0.5, 0.5, 0.5};
  std::array<std::uint32_t, kNumEmittingStates> states{0, 0, 0};
};

enum class ModelKind : std::uint8_t { kContextIndependent = 0,
                                      kContextDependent = 1 };

// "L-B+R" for base phone B with left/right context.
std::string triphone_label(const std::string& left, const std::string& base,
                           const std::string& right);
// Base phone of "L-B+R"; returns the label itself when not a triphone.
std::string triphone_base(const std::string& label);

struct AcousticModel {
  ModelKind kind = ModelKind::kContextIndependent;
  int dim = 39;
  std::vector<GaussianMixture> pool;      // physical emission states
  std::map<std::string, PhoneHmm> hmms;   // phones, fillers, triphone clones
  // Triphone label -> physical states, for both dedicated clones and
  // states tied back to the base phone (CD models only).
  std::map<std::string, std::array<std::uint32_t, kNumEmittingStates>> tying;

  int mixture_count() const {
    return pool.empty() ? 0 : pool.front().num_components();
  }

  // Emitting states and transition owner for a phone in context. CI
  // models ignore the context. CD lookups go through the tying map and
  // fall back to the base phone. Throws UnknownToken for missing phones.
  struct Resolved {
    std::string owner;  // label whose transition row applies
    std::array<std::uint32_t, kNumEmittingStates> states;
  };
  Resolved resolve(const std::string& base, const std::string& left,
                   const std::string& right) const;

  const PhoneHmm& hmm(const std::string& label) const;
};

// Model file: magic "MAM1", u32 version=1, little-endian; header (kind,
// feature dim, phone count, mixture count), pool of per-state mixture
// parameters as float32, per-phone transition matrices as float32, then
// the tying map as (triphone label, state index, physical id) triples.
void write_model(const AcousticModel& model,
                 const std::filesystem::path& path);
AcousticModel read_model(const std::filesystem::path& path);

// Log-likelihood evaluator with per-state precomputed constants.
// Rebuild after any parameter change.
class GmmScorer {
 public:
  GmmScorer(const std::vector<GaussianMixture>& pool, int dim);

  // log p(frame | state) for a pool state.
  double log_like(std::uint32_t state, const double* frame) const;

  // Per-component log p(frame, component | state); out must hold
  // num_components entries. Returns the total log-likelihood.
  double component_log_likes(std::uint32_t state, const double* frame,
                             double* out) const;

 private:
  struct PreparedState {
    int num_components;
    std::vector<double> log_norm;  // log w_c - 0.5*(d log 2pi + sum log var)
    std::vector<double> inv_var;   // num_components x dim
    const GaussianMixture* gmm;
  };
  std::vector<PreparedState> states_;
  int dim_;
};

// log(exp(a) + exp(b)) guarding -inf.
double log_add(double a, double b);

}  // namespace tinysr

#endif  // TINYSR_ACOUSTIC_H_
