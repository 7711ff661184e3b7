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

#include "tinysr/trainer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "tinysr/errors.h"
#include "tinysr/parallel.h"
#include "tinysr/simd/kernels.h"

namespace tinysr {

namespace {
constexpr double kLogZero = -std::numeric_limits<double>::infinity();
constexpr double kOccupancyEps = 1e-8;
constexpr double kTransitionFloor = 1e-10;
}  // namespace

FeatureMatrix FeatureMatrix::from(const FeatureSequence& fs) {
  FeatureMatrix m;
  m.num_frames = fs.num_frames();
  m.dim = fs.dim;
  m.data.assign(fs.data.begin(), fs.data.end());
  return m;
}

void CompositeHmm::build_adjacency() {
  in_arcs.assign(pool_state.size(), {});
  out_arcs.assign(pool_state.size(), {});
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    in_arcs[arcs[i].to].push_back(static_cast<std::int32_t>(i));
    out_arcs[arcs[i].from].push_back(static_cast<std::int32_t>(i));
  }
}

namespace {

// Connector-graph builder: phone instances joined by non-emitting
// connectors that are collapsed into direct state-to-state arcs.
struct GraphBuilder {
  struct Connector {
    std::vector<int> instances;  // first instance of a chain
    std::vector<int> eps;        // connector -> connector links
    bool to_end = false;
    int out_degree() const {
      return static_cast<int>(instances.size() + eps.size()) + (to_end ? 1 : 0);
    }
  };
  struct Instance {
    AcousticModel::Resolved resolved;
    int next_instance = -1;   // direct chain link, or
    int exit_connector = -1;  // exit via a connector
  };

  const AcousticModel& model;
  std::vector<Connector> connectors;
  std::vector<Instance> instances;

  explicit GraphBuilder(const AcousticModel& m) : model(m) {}

  int new_connector() {
    connectors.emplace_back();
    return static_cast<int>(connectors.size()) - 1;
  }

  int add_instance(const AcousticModel::Resolved& resolved) {
    instances.push_back({resolved, -1, -1});
    return static_cast<int>(instances.size()) - 1;
  }

  // Adds a chain of phones between two connectors.
  void add_chain(const std::vector<AcousticModel::Resolved>& phones,
                 int entry, int exit) {
    int prev = -1;
    for (std::size_t i = 0; i < phones.size(); ++i) {
      const int inst = add_instance(phones[i]);
      if (i == 0) {
        connectors[entry].instances.push_back(inst);
      } else {
        instances[prev].next_instance = inst;
      }
      prev = inst;
    }
    instances[prev].exit_connector = exit;
  }

  // Entry states reachable from a connector with their accumulated
  // structural log probabilities, plus the log probability of reaching
  // the utterance end. Branches at each connector are uniform.
  struct Expansion {
    std::vector<std::pair<int, double>> entries;  // (instance, logp)
    double end_logp = kLogZero;
  };
  std::vector<Expansion> memo;
  std::vector<char> visited;

  const Expansion& expand(int c) {
    if (memo.empty()) {
      memo.resize(connectors.size());
      visited.assign(connectors.size(), 0);
    }
    if (visited[c]) return memo[c];
    visited[c] = 1;
    Expansion& result = memo[c];
    const Connector& conn = connectors[c];
    const double branch = -std::log(static_cast<double>(conn.out_degree()));
    std::map<int, double> merged;
    for (int inst : conn.instances) {
      auto [it, fresh] = merged.emplace(inst, branch);
      if (!fresh) it->second = log_add(it->second, branch);
    }
    for (int target : conn.eps) {
      const Expansion& sub = expand(target);
      for (const auto& [inst, logp] : sub.entries) {
        auto [it, fresh] = merged.emplace(inst, branch + logp);
        if (!fresh) it->second = log_add(it->second, branch + logp);
      }
      if (sub.end_logp != kLogZero) {
        result.end_logp = log_add(result.end_logp, branch + sub.end_logp);
      }
    }
    if (conn.to_end) result.end_logp = log_add(result.end_logp, branch);
    result.entries.assign(merged.begin(), merged.end());
    return result;
  }

  // Minimum emitting frames from a connector to the end.
  std::vector<int> conn_min, inst_min;
  int min_from_connector(int c) {
    if (conn_min.empty()) {
      conn_min.assign(connectors.size(), -1);
      inst_min.assign(instances.size(), -1);
    }
    if (conn_min[c] >= 0) return conn_min[c];
    conn_min[c] = std::numeric_limits<int>::max() / 2;
    const Connector& conn = connectors[c];
    int best = conn.to_end ? 0 : std::numeric_limits<int>::max() / 2;
    for (int inst : conn.instances) {
      best = std::min(best, min_from_instance(inst));
    }
    for (int target : conn.eps) {
      best = std::min(best, min_from_connector(target));
    }
    conn_min[c] = best;
    return best;
  }
  int min_from_instance(int i) {
    if (inst_min[i] >= 0) return inst_min[i];
    inst_min[i] = std::numeric_limits<int>::max() / 2;
    const Instance& inst = instances[i];
    const int rest = inst.next_instance >= 0
                         ? min_from_instance(inst.next_instance)
                         : min_from_connector(inst.exit_connector);
    inst_min[i] = kNumEmittingStates + rest;
    return inst_min[i];
  }

  CompositeHmm finish(int start_connector) {
    CompositeHmm hmm;
    const int num_states =
        static_cast<int>(instances.size()) * kNumEmittingStates;
    hmm.pool_state.resize(num_states);
    hmm.final_logp.assign(num_states, kLogZero);
    hmm.final_owner.assign(num_states, -1);

    std::map<std::string, std::int32_t> owner_ids;
    const auto owner_id = [&](const std::string& label) {
      const auto it = owner_ids.find(label);
      if (it != owner_ids.end()) return it->second;
      const auto id = static_cast<std::int32_t>(hmm.owners.size());
      hmm.owners.push_back(label);
      owner_ids.emplace(label, id);
      return id;
    };

    for (std::size_t i = 0; i < instances.size(); ++i) {
      const Instance& inst = instances[i];
      const int base = static_cast<int>(i) * kNumEmittingStates;
      const PhoneHmm& phone = model.hmm(inst.resolved.owner);
      const std::int32_t owner = owner_id(inst.resolved.owner);
      for (int s = 0; s < kNumEmittingStates; ++s) {
        hmm.pool_state[base + s] = inst.resolved.states[s];
        hmm.arcs.push_back({base + s, base + s, std::log(phone.self_loop[s]),
                            owner, static_cast<std::int8_t>(s), 1});
        if (s + 1 < kNumEmittingStates) {
          hmm.arcs.push_back({base + s, base + s + 1,
                              std::log(phone.forward[s]), owner,
                              static_cast<std::int8_t>(s), 0});
        }
      }
      const int last = base + kNumEmittingStates - 1;
      const double exit_logp = std::log(phone.forward[kNumEmittingStates - 1]);
      if (inst.next_instance >= 0) {
        hmm.arcs.push_back({last, inst.next_instance * kNumEmittingStates,
                            exit_logp, owner, kNumEmittingStates - 1, 0});
      } else {
        const Expansion& exp = expand(inst.exit_connector);
        for (const auto& [next_inst, logp] : exp.entries) {
          hmm.arcs.push_back({last, next_inst * kNumEmittingStates,
                              exit_logp + logp, owner,
                              kNumEmittingStates - 1, 0});
        }
        if (exp.end_logp != kLogZero) {
          hmm.final_logp[last] = exit_logp + exp.end_logp;
          hmm.final_owner[last] = owner;
        }
      }
    }

    const Expansion& start = expand(start_connector);
    for (const auto& [inst, logp] : start.entries) {
      hmm.entries.emplace_back(inst * kNumEmittingStates, logp);
    }
    hmm.min_path_frames = min_from_connector(start_connector);
    hmm.build_adjacency();
    return hmm;
  }
};

AcousticModel::Resolved resolve_ci(const AcousticModel& model,
                                   const std::string& phone) {
  return model.resolve(phone, "", "");
}

// Phones of a pronunciation resolved with word-internal triphone
// contexts; outer contexts collapse to SIL.
std::vector<AcousticModel::Resolved> resolve_word(
    const AcousticModel& model, const std::vector<std::string>& phones) {
  std::vector<AcousticModel::Resolved> out;
  out.reserve(phones.size());
  for (std::size_t i = 0; i < phones.size(); ++i) {
    const std::string& left = i == 0 ? kSilencePhone : phones[i - 1];
    const std::string& right =
        i + 1 == phones.size() ? kSilencePhone : phones[i + 1];
    if (model.kind == ModelKind::kContextDependent &&
        phones[i] != kSilencePhone) {
      out.push_back(model.resolve(phones[i], left, right));
    } else {
      out.push_back(resolve_ci(model, phones[i]));
    }
  }
  return out;
}

}  // namespace

CompositeHmm compile_utterance_hmm(const std::vector<std::string>& tokens,
                                   const PronunciationDictionary& dict,
                                   const FillerDictionary& fillers,
                                   const AcousticModel& model,
                                   const CompileOptions& options) {
  GraphBuilder builder(model);
  const int start = builder.new_connector();
  int cursor = builder.new_connector();
  builder.add_chain({resolve_ci(model, kSilencePhone)}, start, cursor);

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& token = tokens[i];
    const int exit = builder.new_connector();
    if (is_filler_token(token)) {
      const auto it = fillers.entries.find(token);
      if (it == fillers.entries.end()) {
        throw UnknownToken("filler token " + token +
                           " not in filler dictionary");
      }
      builder.add_chain({resolve_ci(model, it->second)}, cursor, exit);
    } else {
      const auto it = dict.entries.find(token);
      if (it == dict.entries.end()) {
        throw UnknownToken("token " + token + " not in dictionary");
      }
      const std::size_t num_prons =
          options.first_pronunciation_only ? 1 : it->second.size();
      for (std::size_t a = 0; a < num_prons; ++a) {
        builder.add_chain(resolve_word(model, it->second[a]), cursor, exit);
      }
    }
    if (i + 1 < tokens.size()) {
      if (options.optional_silence_between_tokens) {
        const int next = builder.new_connector();
        builder.connectors[exit].eps.push_back(next);
        builder.add_chain({resolve_ci(model, kSilencePhone)}, exit, next);
        cursor = next;
      } else {
        cursor = exit;
      }
    } else {
      cursor = exit;
    }
  }

  const int end = builder.new_connector();
  builder.add_chain({resolve_ci(model, kSilencePhone)}, cursor, end);
  builder.connectors[end].to_end = true;
  return builder.finish(start);
}

void TrainingStats::init(const AcousticModel& model) {
  states.clear();
  states.resize(model.pool.size());
  for (std::size_t i = 0; i < model.pool.size(); ++i) {
    const int comps = model.pool[i].num_components();
    states[i].occ.assign(comps, 0.0);
    states[i].mean_acc.assign(static_cast<std::size_t>(comps) * model.dim,
                              0.0);
    states[i].var_acc.assign(static_cast<std::size_t>(comps) * model.dim,
                             0.0);
  }
  transitions.clear();
  total_log_likelihood = 0.0;
  num_frames = 0;
  num_utterances = 0;
}

void TrainingStats::add(const TrainingStats& other) {
  if (states.size() < other.states.size()) states.resize(other.states.size());
  for (std::size_t i = 0; i < other.states.size(); ++i) {
    const GmmAccum& src = other.states[i];
    GmmAccum& dst = states[i];
    if (dst.occ.size() < src.occ.size()) {
      dst.occ.resize(src.occ.size(), 0.0);
      dst.mean_acc.resize(src.mean_acc.size(), 0.0);
      dst.var_acc.resize(src.var_acc.size(), 0.0);
    }
    for (std::size_t c = 0; c < src.occ.size(); ++c) dst.occ[c] += src.occ[c];
    for (std::size_t j = 0; j < src.mean_acc.size(); ++j) {
      dst.mean_acc[j] += src.mean_acc[j];
      dst.var_acc[j] += src.var_acc[j];
    }
  }
  for (const auto& [label, acc] : other.transitions) {
    TransAccum& dst = transitions[label];
    for (int s = 0; s < kNumEmittingStates; ++s) {
      dst.self[s] += acc.self[s];
      dst.forward[s] += acc.forward[s];
    }
  }
  total_log_likelihood += other.total_log_likelihood;
  num_frames += other.num_frames;
  num_utterances += other.num_utterances;
}

namespace {

// Per-frame emission scores for the unique pool states of a composite.
struct EmissionTable {
  std::vector<std::uint32_t> unique_pool;   // sorted unique pool ids
  std::vector<int> state_to_unique;         // composite state -> index
  std::vector<double> values;               // T x unique
  int num_unique = 0;

  void build(const CompositeHmm& hmm, const FeatureMatrix& feats,
             const GmmScorer& scorer) {
    unique_pool.assign(hmm.pool_state.begin(), hmm.pool_state.end());
    std::sort(unique_pool.begin(), unique_pool.end());
    unique_pool.erase(std::unique(unique_pool.begin(), unique_pool.end()),
                      unique_pool.end());
    num_unique = static_cast<int>(unique_pool.size());
    state_to_unique.resize(hmm.num_states());
    for (int s = 0; s < hmm.num_states(); ++s) {
      state_to_unique[s] = static_cast<int>(
          std::lower_bound(unique_pool.begin(), unique_pool.end(),
                           hmm.pool_state[s]) -
          unique_pool.begin());
    }
    values.resize(static_cast<std::size_t>(feats.num_frames) * num_unique);
    for (int t = 0; t < feats.num_frames; ++t) {
      for (int u = 0; u < num_unique; ++u) {
        values[static_cast<std::size_t>(t) * num_unique + u] =
            scorer.log_like(unique_pool[u], feats.frame(t));
      }
    }
  }

  double operator()(int t, int state) const {
    return values[static_cast<std::size_t>(t) * num_unique +
                  state_to_unique[state]];
  }
};

void check_alignable(const CompositeHmm& hmm, const FeatureMatrix& feats) {
  if (feats.num_frames < hmm.min_path_frames) {
    throw UtteranceTooShort(
        "utterance has " + std::to_string(feats.num_frames) +
        " frames but the shortest alignment needs " +
        std::to_string(hmm.min_path_frames));
  }
}

}  // namespace

double forward_backward(const CompositeHmm& hmm, const FeatureMatrix& feats,
                        const GmmScorer& scorer, TrainingStats* stats,
                        std::vector<double>* gamma_out) {
  check_alignable(hmm, feats);
  const int T = feats.num_frames;
  const int S = hmm.num_states();

  EmissionTable emis;
  emis.build(hmm, feats, scorer);

  std::vector<double> alpha(static_cast<std::size_t>(T) * S, kLogZero);
  std::vector<double> beta(static_cast<std::size_t>(T) * S, kLogZero);

  for (const auto& [state, logp] : hmm.entries) {
    alpha[state] = log_add(alpha[state], logp + emis(0, state));
  }
  for (int t = 1; t < T; ++t) {
    double* cur = alpha.data() + static_cast<std::size_t>(t) * S;
    const double* prev = alpha.data() + static_cast<std::size_t>(t - 1) * S;
    for (int s = 0; s < S; ++s) {
      double acc = kLogZero;
      for (const std::int32_t ai : hmm.in_arcs[s]) {
        const CompositeHmm::Arc& arc = hmm.arcs[ai];
        if (prev[arc.from] == kLogZero) continue;
        acc = log_add(acc, prev[arc.from] + arc.logp);
      }
      cur[s] = acc == kLogZero ? kLogZero : acc + emis(t, s);
    }
  }

  double ll = kLogZero;
  {
    const double* last = alpha.data() + static_cast<std::size_t>(T - 1) * S;
    for (int s = 0; s < S; ++s) {
      if (last[s] == kLogZero || hmm.final_logp[s] == kLogZero) continue;
      ll = log_add(ll, last[s] + hmm.final_logp[s]);
    }
  }
  if (ll == kLogZero) {
    throw UtteranceTooShort("no valid alignment for utterance");
  }
  if (stats == nullptr && gamma_out == nullptr) return ll;

  for (int s = 0; s < S; ++s) {
    beta[static_cast<std::size_t>(T - 1) * S + s] = hmm.final_logp[s];
  }
  for (int t = T - 2; t >= 0; --t) {
    double* cur = beta.data() + static_cast<std::size_t>(t) * S;
    const double* next = beta.data() + static_cast<std::size_t>(t + 1) * S;
    for (int s = 0; s < S; ++s) {
      double acc = kLogZero;
      for (const std::int32_t ai : hmm.out_arcs[s]) {
        const CompositeHmm::Arc& arc = hmm.arcs[ai];
        if (next[arc.to] == kLogZero) continue;
        acc = log_add(acc, arc.logp + emis(t + 1, arc.to) + next[arc.to]);
      }
      cur[s] = acc;
    }
  }

  if (gamma_out != nullptr) {
    gamma_out->assign(static_cast<std::size_t>(T) * S, 0.0);
    for (int t = 0; t < T; ++t) {
      for (int s = 0; s < S; ++s) {
        const double lg = alpha[static_cast<std::size_t>(t) * S + s] +
                          beta[static_cast<std::size_t>(t) * S + s] - ll;
        (*gamma_out)[static_cast<std::size_t>(t) * S + s] =
            lg == kLogZero ? 0.0 : std::exp(lg);
      }
    }
  }

  if (stats != nullptr) {
    // Emission statistics, pooled per physical state per frame.
    std::vector<double> gamma_pool(emis.num_unique);
    std::vector<double> comp_ll(64);
    for (int t = 0; t < T; ++t) {
      std::fill(gamma_pool.begin(), gamma_pool.end(), 0.0);
      for (int s = 0; s < S; ++s) {
        const double lg = alpha[static_cast<std::size_t>(t) * S + s] +
                          beta[static_cast<std::size_t>(t) * S + s] - ll;
        if (lg != kLogZero) gamma_pool[emis.state_to_unique[s]] += std::exp(lg);
      }
      const double* frame = feats.frame(t);
      for (int u = 0; u < emis.num_unique; ++u) {
        const double g = gamma_pool[u];
        if (g <= 0.0) continue;
        const std::uint32_t pool_id = emis.unique_pool[u];
        TrainingStats::GmmAccum& acc = stats->states[pool_id];
        const int comps = static_cast<int>(acc.occ.size());
        if (static_cast<int>(comp_ll.size()) < comps) comp_ll.resize(comps);
        const double total =
            scorer.component_log_likes(pool_id, frame, comp_ll.data());
        for (int c = 0; c < comps; ++c) {
          if (comp_ll[c] == kLogZero) continue;
          const double gc = g * std::exp(comp_ll[c] - total);
          if (gc <= 0.0) continue;
          acc.occ[c] += gc;
          simd::ops().axpy(gc, frame,
                           acc.mean_acc.data() +
                               static_cast<std::size_t>(c) * feats.dim,
                           feats.dim);
          simd::ops().axpy_sq(gc, frame,
                              acc.var_acc.data() +
                                  static_cast<std::size_t>(c) * feats.dim,
                              feats.dim);
        }
      }
    }

    // Transition statistics.
    std::vector<TrainingStats::TransAccum> owner_acc(hmm.owners.size());
    for (int t = 0; t + 1 < T; ++t) {
      const double* at = alpha.data() + static_cast<std::size_t>(t) * S;
      const double* bn = beta.data() + static_cast<std::size_t>(t + 1) * S;
      for (const CompositeHmm::Arc& arc : hmm.arcs) {
        if (at[arc.from] == kLogZero || bn[arc.to] == kLogZero) continue;
        const double lxi =
            at[arc.from] + arc.logp + emis(t + 1, arc.to) + bn[arc.to] - ll;
        const double xi = std::exp(lxi);
        if (arc.self) {
          owner_acc[arc.owner].self[arc.row] += xi;
        } else {
          owner_acc[arc.owner].forward[arc.row] += xi;
        }
      }
    }
    const double* last = alpha.data() + static_cast<std::size_t>(T - 1) * S;
    for (int s = 0; s < S; ++s) {
      if (last[s] == kLogZero || hmm.final_logp[s] == kLogZero) continue;
      owner_acc[hmm.final_owner[s]].forward[kNumEmittingStates - 1] +=
          std::exp(last[s] + hmm.final_logp[s] - ll);
    }
    for (std::size_t o = 0; o < hmm.owners.size(); ++o) {
      TrainingStats::TransAccum& dst = stats->transitions[hmm.owners[o]];
      for (int s = 0; s < kNumEmittingStates; ++s) {
        dst.self[s] += owner_acc[o].self[s];
        dst.forward[s] += owner_acc[o].forward[s];
      }
    }
    stats->total_log_likelihood += ll;
    stats->num_frames += static_cast<std::size_t>(T);
    stats->num_utterances += 1;
  }
  return ll;
}

ViterbiPath viterbi_align(const CompositeHmm& hmm, const FeatureMatrix& feats,
                          const GmmScorer& scorer) {
  check_alignable(hmm, feats);
  const int T = feats.num_frames;
  const int S = hmm.num_states();
  EmissionTable emis;
  emis.build(hmm, feats, scorer);

  std::vector<double> score(static_cast<std::size_t>(T) * S, kLogZero);
  std::vector<std::int32_t> back(static_cast<std::size_t>(T) * S, -1);

  for (const auto& [state, logp] : hmm.entries) {
    const double v = logp + emis(0, state);
    if (v > score[state]) score[state] = v;
  }
  for (int t = 1; t < T; ++t) {
    double* cur = score.data() + static_cast<std::size_t>(t) * S;
    const double* prev = score.data() + static_cast<std::size_t>(t - 1) * S;
    std::int32_t* bp = back.data() + static_cast<std::size_t>(t) * S;
    for (int s = 0; s < S; ++s) {
      double best = kLogZero;
      std::int32_t best_from = -1;
      for (const std::int32_t ai : hmm.in_arcs[s]) {
        const CompositeHmm::Arc& arc = hmm.arcs[ai];
        if (prev[arc.from] == kLogZero) continue;
        const double v = prev[arc.from] + arc.logp;
        if (v > best) {
          best = v;
          best_from = arc.from;
        }
      }
      if (best != kLogZero) {
        cur[s] = best + emis(t, s);
        bp[s] = best_from;
      }
    }
  }

  double best = kLogZero;
  int best_state = -1;
  const double* last = score.data() + static_cast<std::size_t>(T - 1) * S;
  for (int s = 0; s < S; ++s) {
    if (last[s] == kLogZero || hmm.final_logp[s] == kLogZero) continue;
    const double v = last[s] + hmm.final_logp[s];
    if (v > best) {
      best = v;
      best_state = s;
    }
  }
  if (best_state < 0) {
    throw UtteranceTooShort("no valid alignment for utterance");
  }
  ViterbiPath path;
  path.log_prob = best;
  path.states.resize(T);
  int s = best_state;
  for (int t = T - 1; t >= 0; --t) {
    path.states[t] = s;
    if (t > 0) s = back[static_cast<std::size_t>(t) * S + s];
  }
  return path;
}

namespace {

std::vector<std::string> linear_phones(const std::vector<std::string>& tokens,
                                       const PronunciationDictionary& dict,
                                       const FillerDictionary& fillers) {
  std::vector<std::string> phones;
  phones.push_back(kSilencePhone);
  for (const auto& token : tokens) {
    if (is_filler_token(token)) {
      const auto it = fillers.entries.find(token);
      if (it == fillers.entries.end()) {
        throw UnknownToken("filler token " + token +
                           " not in filler dictionary");
      }
      phones.push_back(it->second);
    } else {
      const auto it = dict.entries.find(token);
      if (it == dict.entries.end()) {
        throw UnknownToken("token " + token + " not in dictionary");
      }
      for (const auto& p : it->second.front()) phones.push_back(p);
    }
  }
  phones.push_back(kSilencePhone);
  return phones;
}

}  // namespace

AcousticModel flat_start(const CorpusManifest& manifest,
                         const std::map<std::string, FeatureMatrix>& features,
                         const TrainOptions& options) {
  if (manifest.train.utterances.empty()) {
    throw NoTrainingData("training set has no utterances");
  }
  int dim = 0;
  for (const auto& [id, m] : features) {
    (void)id;
    if (m.num_frames > 0) {
      dim = m.dim;
      break;
    }
  }
  if (dim == 0) throw NoTrainingData("no non-empty feature sequences");

  AcousticModel model;
  model.kind = ModelKind::kContextIndependent;
  model.dim = dim;
  for (const auto& phone : manifest.phone_set.phones) {
    PhoneHmm hmm;
    hmm.label = phone;
    for (int s = 0; s < kNumEmittingStates; ++s) {
      hmm.states[s] = static_cast<std::uint32_t>(model.pool.size());
      GaussianMixture g;
      g.dim = dim;
      g.weights = {1.0};
      g.means.assign(dim, 0.0);
      g.variances.assign(dim, 1.0);
      model.pool.push_back(std::move(g));
    }
    model.hmms.emplace(phone, hmm);
  }

  // Per-state first/second moments from the uniform segmentation.
  std::vector<double> count(model.pool.size(), 0.0);
  std::vector<double> sum(model.pool.size() * dim, 0.0);
  std::vector<double> sumsq(model.pool.size() * dim, 0.0);
  std::vector<double> gsum(dim, 0.0), gsumsq(dim, 0.0);
  double gcount = 0.0;
  std::size_t used = 0;

  for (const auto& utt : manifest.train.utterances) {
    const auto fit = features.find(utt.id);
    if (fit == features.end() || fit->second.num_frames == 0) continue;
    const FeatureMatrix& feats = fit->second;
    const auto phones =
        linear_phones(utt.tokens, manifest.dictionary, manifest.fillers);
    std::vector<std::uint32_t> state_seq;
    for (const auto& phone : phones) {
      const PhoneHmm& h = model.hmm(phone);
      for (int s = 0; s < kNumEmittingStates; ++s)
        state_seq.push_back(h.states[s]);
    }
    const int T = feats.num_frames;
    const int S = static_cast<int>(state_seq.size());
    const int base = T / S;
    const int extra = T - base * S;
    int t = 0;
    for (int s = 0; s < S; ++s) {
      const int len = base + (s < extra ? 1 : 0);
      for (int j = 0; j < len; ++j, ++t) {
        const double* frame = feats.frame(t);
        const std::uint32_t id = state_seq[s];
        count[id] += 1.0;
        simd::ops().axpy(1.0, frame, sum.data() + id * dim, dim);
        simd::ops().axpy_sq(1.0, frame, sumsq.data() + id * dim, dim);
        gcount += 1.0;
        simd::ops().axpy(1.0, frame, gsum.data(), dim);
        simd::ops().axpy_sq(1.0, frame, gsumsq.data(), dim);
      }
    }
    ++used;
  }
  if (used == 0) {
    throw NoTrainingData("no training utterance has extracted features");
  }

  std::vector<double> gmean(dim), gvar(dim);
  for (int d = 0; d < dim; ++d) {
    gmean[d] = gsum[d] / gcount;
    gvar[d] = std::max(gsumsq[d] / gcount - gmean[d] * gmean[d],
                       options.variance_floor);
  }
  for (std::size_t i = 0; i < model.pool.size(); ++i) {
    GaussianMixture& g = model.pool[i];
    if (count[i] > 0.0) {
      for (int d = 0; d < dim; ++d) {
        const double m = sum[i * dim + d] / count[i];
        g.means[d] = m;
        g.variances[d] = std::max(sumsq[i * dim + d] / count[i] - m * m,
                                  options.variance_floor);
      }
    } else {
      std::copy(gmean.begin(), gmean.end(), g.means.begin());
      std::copy(gvar.begin(), gvar.end(), g.variances.begin());
    }
  }
  return model;
}

namespace {

void re_estimate(AcousticModel& model, const TrainingStats& stats,
                 const TrainOptions& options) {
  const int dim = model.dim;
  for (std::size_t i = 0; i < model.pool.size(); ++i) {
    const TrainingStats::GmmAccum& acc = stats.states[i];
    GaussianMixture& g = model.pool[i];
    const double total = std::accumulate(acc.occ.begin(), acc.occ.end(), 0.0);
    if (total < kOccupancyEps) continue;  // state unseen, hold parameters
    const int comps = g.num_components();
    double weight_sum = 0.0;
    for (int c = 0; c < comps; ++c) {
      if (acc.occ[c] < kOccupancyEps) {
        // Zero-occupancy component: parameters held, weight floored.
        g.weights[c] = options.weight_floor;
      } else {
        g.weights[c] = std::max(acc.occ[c] / total, options.weight_floor);
        for (int d = 0; d < dim; ++d) {
          const double m = acc.mean_acc[c * dim + d] / acc.occ[c];
          g.means[c * dim + d] = m;
          g.variances[c * dim + d] =
              std::max(acc.var_acc[c * dim + d] / acc.occ[c] - m * m,
                       options.variance_floor);
        }
      }
      weight_sum += g.weights[c];
    }
    for (int c = 0; c < comps; ++c) g.weights[c] /= weight_sum;
  }

  for (const auto& [label, acc] : stats.transitions) {
    const auto it = model.hmms.find(label);
    if (it == model.hmms.end()) continue;
    PhoneHmm& h = it->second;
    for (int s = 0; s < kNumEmittingStates; ++s) {
      const double total = acc.self[s] + acc.forward[s];
      if (total < kOccupancyEps) continue;
      double a = std::max(acc.self[s] / total, kTransitionFloor);
      double b = std::max(acc.forward[s] / total, kTransitionFloor);
      const double norm = a + b;
      h.self_loop[s] = a / norm;
      h.forward[s] = b / norm;
    }
  }
}

}  // namespace

IterationResult baum_welch_iteration(
    AcousticModel& model, const CorpusManifest& manifest,
    const std::map<std::string, FeatureMatrix>& features,
    const TrainOptions& options) {
  const GmmScorer scorer(model.pool, model.dim);
  CompileOptions compile_options;
  compile_options.optional_silence_between_tokens = options.optional_silence;

  const auto& utterances = manifest.train.utterances;
  const std::size_t n = utterances.size();
  const int jobs = std::max(1, options.jobs);
  const std::size_t num_shards =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), std::max<std::size_t>(n, 1));
  std::vector<TrainingStats> shard_stats(num_shards);
  std::vector<std::size_t> shard_skipped(num_shards, 0);
  for (auto& s : shard_stats) s.init(model);

  parallel_blocks(n, jobs, [&](std::size_t shard, std::size_t begin,
                               std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& utt = utterances[i];
      const auto fit = features.find(utt.id);
      if (fit == features.end()) {
        ++shard_skipped[shard];
        continue;
      }
      try {
        const CompositeHmm hmm =
            compile_utterance_hmm(utt.tokens, manifest.dictionary,
                                  manifest.fillers, model, compile_options);
        forward_backward(hmm, fit->second, scorer, &shard_stats[shard]);
      } catch (const Error&) {
        ++shard_skipped[shard];
      }
    }
  });

  TrainingStats total;
  total.init(model);
  for (const auto& s : shard_stats) total.add(s);
  IterationResult result;
  result.used = total.num_utterances;
  result.skipped = n - total.num_utterances;
  result.total_log_likelihood = total.total_log_likelihood;
  if (result.used == 0) {
    throw NoTrainingData("every training utterance failed in Baum-Welch");
  }
  re_estimate(model, total, options);
  return result;
}

AcousticModel split_mixtures(const AcousticModel& model, int target) {
  const int current = model.mixture_count();
  if (target != 2 * current || target > 8) {
    throw BadSchedule("mixture split must double the component count (" +
                      std::to_string(current) + " -> " +
                      std::to_string(target) + " requested, max 8)");
  }
  AcousticModel out = model;
  for (GaussianMixture& g : out.pool) {
    const int comps = g.num_components();
    const int dim = g.dim;
    GaussianMixture split;
    split.dim = dim;
    split.weights.reserve(2 * comps);
    split.means.reserve(2 * static_cast<std::size_t>(comps) * dim);
    split.variances.reserve(2 * static_cast<std::size_t>(comps) * dim);
    for (int c = 0; c < comps; ++c) {
      for (const double sign : {-1.0, 1.0}) {
        split.weights.push_back(0.5 * g.weights[c]);
        for (int d = 0; d < dim; ++d) {
          const double sigma = std::sqrt(g.variances[c * dim + d]);
          split.means.push_back(g.means[c * dim + d] + sign * 0.2 * sigma);
        }
        for (int d = 0; d < dim; ++d) {
          split.variances.push_back(g.variances[c * dim + d]);
        }
      }
    }
    g = std::move(split);
  }
  return out;
}

AcousticModel build_cd_model(const AcousticModel& ci_model,
                             const CorpusManifest& manifest, int min_count) {
  if (min_count < 1) throw BadConfig("cd_min_count must be >= 1");
  std::map<std::string, long long> counts;
  for (const auto& utt : manifest.train.utterances) {
    for (const auto& token : utt.tokens) {
      if (is_filler_token(token)) continue;
      const auto it = manifest.dictionary.entries.find(token);
      if (it == manifest.dictionary.entries.end()) continue;
      for (const auto& pron : it->second) {
        for (std::size_t i = 0; i < pron.size(); ++i) {
          if (pron[i] == kSilencePhone) continue;
          const std::string& left = i == 0 ? kSilencePhone : pron[i - 1];
          const std::string& right =
              i + 1 == pron.size() ? kSilencePhone : pron[i + 1];
          ++counts[triphone_label(left, pron[i], right)];
        }
      }
    }
  }

  AcousticModel model = ci_model;
  model.kind = ModelKind::kContextDependent;
  for (const auto& [label, count] : counts) {
    const std::string base = triphone_base(label);
    const PhoneHmm& base_hmm = model.hmm(base);
    if (count >= min_count) {
      PhoneHmm clone = base_hmm;
      clone.label = label;
      for (int s = 0; s < kNumEmittingStates; ++s) {
        clone.states[s] = static_cast<std::uint32_t>(model.pool.size());
        model.pool.push_back(model.pool[base_hmm.states[s]]);
      }
      model.tying[label] = clone.states;
      model.hmms.emplace(label, std::move(clone));
    } else {
      model.tying[label] = base_hmm.states;
    }
  }
  return model;
}

std::vector<StageResult> run_training(
    const CorpusManifest& manifest,
    const std::map<std::string, FeatureMatrix>& features,
    const TrainOptions& options, const StageCallback& on_stage,
    const StageSource& try_load) {
  if (options.mixture_schedule.empty() || options.mixture_schedule[0] != 1) {
    throw BadSchedule("mixture schedule must start at 1");
  }
  for (std::size_t i = 1; i < options.mixture_schedule.size(); ++i) {
    if (options.mixture_schedule[i] != 2 * options.mixture_schedule[i - 1]) {
      throw BadSchedule("mixture schedule must double at every step");
    }
  }

  std::vector<StageResult> stages;
  const auto train_stage = [&](AcousticModel& model, const std::string& name) {
    if (try_load) {
      if (auto cached = try_load(name)) {
        model = std::move(*cached);
        stages.push_back({name, model.kind, model.mixture_count(), {}});
        return;
      }
    }
    StageResult sr;
    sr.name = name;
    sr.kind = model.kind;
    sr.mixtures = model.mixture_count();
    double prev = 0.0;
    try {
      for (int it = 0; it < options.iterations_per_stage; ++it) {
        const IterationResult res =
            baum_welch_iteration(model, manifest, features, options);
        sr.iteration_log_likelihoods.push_back(res.total_log_likelihood);
        if (it > 0) {
          const double gain = res.total_log_likelihood - prev;
          if (gain < options.convergence_rel * std::abs(prev)) {
            prev = res.total_log_likelihood;
            break;
          }
        }
        prev = res.total_log_likelihood;
      }
    } catch (const Error& e) {
      throw Error("stage " + name + ": " + e.what());
    }
    stages.push_back(sr);
    if (on_stage) on_stage(sr, model);
  };

  AcousticModel model = flat_start(manifest, features, options);
  AcousticModel ci_first;
  for (std::size_t i = 0; i < options.mixture_schedule.size(); ++i) {
    const int target = options.mixture_schedule[i];
    if (target > model.mixture_count()) {
      model = split_mixtures(model, target);
    }
    train_stage(model, "ci_" + std::to_string(target));
    if (i == 0) ci_first = model;
  }

  if (options.cd_enabled) {
    model = build_cd_model(ci_first, manifest, options.cd_min_count);
    for (const int target : options.mixture_schedule) {
      if (target > model.mixture_count()) {
        model = split_mixtures(model, target);
      }
      train_stage(model, "cd_" + std::to_string(target));
    }
  }
  return stages;
}

void quantize_model(AcousticModel& model) {
  const auto q = [](double v) {
    return static_cast<double>(static_cast<float>(v));
  };
  for (GaussianMixture& g : model.pool) {
    for (double& v : g.weights) v = q(v);
    for (double& v : g.means) v = q(v);
    for (double& v : g.variances) v = q(v);
  }
  for (auto& [label, hmm] : model.hmms) {
    (void)label;
    for (int s = 0; s < kNumEmittingStates; ++s) {
      hmm.self_loop[s] = q(hmm.self_loop[s]);
      hmm.forward[s] = q(hmm.forward[s]);
    }
  }
}

}  // namespace tinysr
