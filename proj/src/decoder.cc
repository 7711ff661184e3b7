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

#include "tinysr/decoder.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "tinysr/errors.h"
#include "tinysr/parallel.h"
#include "tinysr/trainer.h"

namespace tinysr {

namespace {
constexpr double kLogZero = -std::numeric_limits<double>::infinity();
}

void DecodeConfig::validate() const {
  if (!(beam_logwidth > 0.0)) {
    throw BadConfig("beam_logwidth must be positive");
  }
  if (language_weight < 0.0) {
    throw BadConfig("language_weight must be >= 0");
  }
}

namespace {

// Phones of one pronunciation resolved with word-internal triphone
// contexts (outer contexts collapse to SIL), matching the trainer.
std::vector<AcousticModel::Resolved> resolve_pron(
    const AcousticModel& am, const std::vector<std::string>& phones) {
  std::vector<AcousticModel::Resolved> out;
  out.reserve(phones.size());
  for (std::size_t i = 0; i < phones.size(); ++i) {
    if (am.kind == ModelKind::kContextDependent &&
        phones[i] != kSilencePhone) {
      const std::string& left = i == 0 ? kSilencePhone : phones[i - 1];
      const std::string& right =
          i + 1 == phones.size() ? kSilencePhone : phones[i + 1];
      out.push_back(am.resolve(phones[i], left, right));
    } else {
      out.push_back(am.resolve(phones[i], "", ""));
    }
  }
  return out;
}

// Incrementally builds a SearchGraph: allocates per-phone emitting
// states with their internal transition arcs, and connects instances
// through junction entry lists.
struct NetBuilder {
  SearchGraph graph;
  const AcousticModel& am;

  explicit NetBuilder(const AcousticModel& a) : am(a) {}

  struct Chain {
    std::int32_t entry_state;
    std::int32_t last_state;
    double exit_logp;  // log forward prob of the final emitting state
  };

  // Entry point into an instance starting at a junction.
  struct EntrySpec {
    std::int32_t state;
    double base_logp;
    double lm_logp;
    std::int32_t token;
    std::int8_t penalty;
  };

  int add_token_label(const std::string& label, bool filler) {
    graph.token_labels.push_back(label);
    graph.token_is_filler.push_back(filler ? 1 : 0);
    return static_cast<int>(graph.token_labels.size()) - 1;
  }

  Chain add_chain(const std::vector<AcousticModel::Resolved>& phones) {
    Chain chain{-1, -1, 0.0};
    for (std::size_t i = 0; i < phones.size(); ++i) {
      const PhoneHmm& hmm = am.hmm(phones[i].owner);
      const auto base = static_cast<std::int32_t>(graph.pool_state.size());
      for (int s = 0; s < kNumEmittingStates; ++s) {
        graph.pool_state.push_back(phones[i].states[s]);
        graph.arcs.push_back({base + s, base + s,
                              std::log(hmm.self_loop[s]), 0.0, -1, 0});
        if (s + 1 < kNumEmittingStates) {
          graph.arcs.push_back({base + s + 1, base + s,
                                std::log(hmm.forward[s]), 0.0, -1, 0});
        }
      }
      if (i == 0) chain.entry_state = base;
      if (chain.last_state >= 0) {
        // previous phone's exit feeds this phone's first state
        graph.arcs.push_back({base, chain.last_state, chain.exit_logp, 0.0,
                              -1, 0});
      }
      chain.last_state = base + kNumEmittingStates - 1;
      chain.exit_logp = std::log(hmm.forward[kNumEmittingStates - 1]);
    }
    return chain;
  }

  void connect(const Chain& chain, const std::vector<EntrySpec>& entries) {
    for (const EntrySpec& e : entries) {
      graph.arcs.push_back({e.state, chain.last_state,
                            chain.exit_logp + e.base_logp, e.lm_logp, e.token,
                            e.penalty});
    }
  }

  SearchGraph finish(const std::vector<EntrySpec>& start_entries) {
    for (const EntrySpec& e : start_entries) {
      graph.entry_arcs.push_back(
          {e.state, -1, e.base_logp, e.lm_logp, e.token, e.penalty});
    }
    graph.in_arcs.assign(graph.pool_state.size(), {});
    for (std::size_t i = 0; i < graph.arcs.size(); ++i) {
      graph.in_arcs[graph.arcs[i].to].push_back(static_cast<std::int32_t>(i));
    }
    graph.finals.resize(graph.pool_state.size());
    return std::move(graph);
  }
};

std::vector<std::string> decodable_words(const NGramModel& lm) {
  std::vector<std::string> words;
  for (const auto& w : lm.vocab) {
    if (w != kSentenceEnd && w != kUnkWord) words.push_back(w);
  }
  return words;
}

}  // namespace

SearchGraph SearchGraph::build(const PronunciationDictionary& dict,
                               const FillerDictionary& fillers,
                               const NGramModel& lm, const AcousticModel& am) {
  const std::vector<std::string> words = decodable_words(lm);
  {
    std::string missing;
    for (const auto& w : words) {
      if (!dict.contains(w)) missing += (missing.empty() ? "" : ", ") + w;
    }
    if (!missing.empty()) {
      throw MissingPronunciation(
          "language model words without pronunciations: " + missing);
    }
  }

  NetBuilder builder(am);

  // Histories: every reachable n-gram context (start-padded prefixes
  // plus all word combinations).
  std::map<std::vector<int>, int> history_index;
  std::vector<std::vector<int>> histories;
  {
    std::vector<std::vector<int>> frontier;
    frontier.emplace_back(lm.order - 1, lm.start_id());
    while (!frontier.empty()) {
      std::vector<std::vector<int>> next;
      for (auto& h : frontier) {
        if (history_index.emplace(h, static_cast<int>(histories.size()))
                .second) {
          histories.push_back(h);
          for (const auto& w : words) {
            std::vector<int> shifted(h.begin() + (h.empty() ? 0 : 1), h.end());
            if (lm.order > 1) shifted.push_back(lm.word_id(w));
            next.push_back(std::move(shifted));
          }
        }
      }
      frontier = std::move(next);
    }
  }
  const int num_hist = static_cast<int>(histories.size());

  struct Pending {
    std::int32_t last_state;
    double exit_logp;
    int target_junction;
  };
  std::vector<Pending> pending;
  std::vector<std::vector<NetBuilder::EntrySpec>> junction(num_hist);

  // Filler tokens (plus decoded silence) loop on their own junction.
  std::vector<std::pair<std::string, std::string>> filler_units;
  filler_units.emplace_back(kSilToken, kSilencePhone);
  for (const auto& [token, phone] : fillers.entries) {
    filler_units.emplace_back(token, phone);
  }

  for (int hi = 0; hi < num_hist; ++hi) {
    const std::vector<int>& h = histories[hi];
    for (const auto& w : words) {
      const int wid = lm.word_id(w);
      const double lm_logp = std::log(lm.prob(h, wid));
      std::vector<int> shifted(h.begin() + (h.empty() ? 0 : 1), h.end());
      if (lm.order > 1) shifted.push_back(wid);
      const int target = history_index.at(shifted);
      const auto& prons = dict.entries.at(w);
      const double branch = -std::log(static_cast<double>(prons.size()));
      const int token = builder.add_token_label(w, false);
      for (const auto& pron : prons) {
        const NetBuilder::Chain chain =
            builder.add_chain(resolve_pron(am, pron));
        junction[hi].push_back(
            {chain.entry_state, branch, lm_logp, token, 1});
        pending.push_back({chain.last_state, chain.exit_logp, target});
      }
    }
    for (const auto& [token_label, phone] : filler_units) {
      const int token = builder.add_token_label(token_label, true);
      const NetBuilder::Chain chain =
          builder.add_chain(resolve_pron(am, {phone}));
      junction[hi].push_back({chain.entry_state, 0.0, 0.0, token, 2});
      pending.push_back({chain.last_state, chain.exit_logp, hi});
    }
  }

  for (const Pending& p : pending) {
    for (const NetBuilder::EntrySpec& e : junction[p.target_junction]) {
      builder.graph.arcs.push_back({e.state, p.last_state,
                                    p.exit_logp + e.base_logp, e.lm_logp,
                                    e.token, e.penalty});
    }
  }

  const int start = history_index.at(
      std::vector<int>(lm.order - 1, lm.start_id()));
  SearchGraph graph = builder.finish(junction[start]);

  // Utterance end: exit probability plus ln P(</s> | history).
  const int end_word = lm.end_id();
  std::vector<double> end_logp(num_hist);
  for (int hi = 0; hi < num_hist; ++hi) {
    end_logp[hi] = std::log(lm.prob(histories[hi], end_word));
  }
  for (const Pending& p : pending) {
    graph.finals[p.last_state] = {p.exit_logp, end_logp[p.target_junction]};
  }

  graph.lm = &lm;
  graph.am = &am;
  graph.num_histories_ = num_hist;
  return graph;
}

SearchGraph SearchGraph::build_forced(const std::vector<std::string>& tokens,
                                      const PronunciationDictionary& dict,
                                      const FillerDictionary& fillers,
                                      const NGramModel& lm,
                                      const AcousticModel& am) {
  NetBuilder builder(am);
  const int num_positions = static_cast<int>(tokens.size()) + 1;

  // LM history at each position, advanced by the non-filler tokens.
  std::vector<std::vector<int>> history(num_positions);
  history[0].assign(lm.order - 1, lm.start_id());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    history[i + 1] = history[i];
    if (!is_filler_token(tokens[i])) {
      const int wid = lm.word_id(tokens[i]);
      if (wid < 0 || wid == lm.start_id()) {
        throw OovToken("token \"" + tokens[i] +
                       "\" is outside the language model vocabulary");
      }
      if (lm.order > 1) {
        history[i + 1].erase(history[i + 1].begin());
        history[i + 1].push_back(wid);
      }
    }
  }

  struct Pending {
    std::int32_t last_state;
    double exit_logp;
    int target_position;
  };
  std::vector<Pending> pending;
  std::vector<std::vector<NetBuilder::EntrySpec>> junction(num_positions);

  for (int pos = 0; pos < num_positions; ++pos) {
    if (pos < static_cast<int>(tokens.size())) {
      const std::string& token = tokens[pos];
      if (token == kSilToken) {
        const int tok = builder.add_token_label(token, true);
        const NetBuilder::Chain chain =
            builder.add_chain(resolve_pron(am, {kSilencePhone}));
        junction[pos].push_back({chain.entry_state, 0.0, 0.0, tok, 2});
        pending.push_back({chain.last_state, chain.exit_logp, pos + 1});
      } else if (is_filler_token(token)) {
        const auto it = fillers.entries.find(token);
        if (it == fillers.entries.end()) {
          throw UnknownToken("filler token " + token +
                             " not in filler dictionary");
        }
        const int tok = builder.add_token_label(token, true);
        const NetBuilder::Chain chain =
            builder.add_chain(resolve_pron(am, {it->second}));
        junction[pos].push_back({chain.entry_state, 0.0, 0.0, tok, 2});
        pending.push_back({chain.last_state, chain.exit_logp, pos + 1});
      } else {
        const auto it = dict.entries.find(token);
        if (it == dict.entries.end()) {
          throw UnknownToken("token " + token + " not in dictionary");
        }
        const double lm_logp = std::log(
            lm.prob(history[pos], lm.word_id(token)));
        const double branch =
            -std::log(static_cast<double>(it->second.size()));
        const int tok = builder.add_token_label(token, false);
        for (const auto& pron : it->second) {
          const NetBuilder::Chain chain =
              builder.add_chain(resolve_pron(am, pron));
          junction[pos].push_back(
              {chain.entry_state, branch, lm_logp, tok, 1});
          pending.push_back({chain.last_state, chain.exit_logp, pos + 1});
        }
      }
    }
    // Optional silence loop at every junction.
    const int tok = builder.add_token_label(kSilToken, true);
    const NetBuilder::Chain chain =
        builder.add_chain(resolve_pron(am, {kSilencePhone}));
    junction[pos].push_back({chain.entry_state, 0.0, 0.0, tok, 2});
    pending.push_back({chain.last_state, chain.exit_logp, pos});
  }

  for (const Pending& p : pending) {
    for (const NetBuilder::EntrySpec& e : junction[p.target_position]) {
      builder.graph.arcs.push_back({e.state, p.last_state,
                                    p.exit_logp + e.base_logp, e.lm_logp,
                                    e.token, e.penalty});
    }
  }

  SearchGraph graph = builder.finish(junction[0]);
  const double end_logp =
      std::log(lm.prob(history[num_positions - 1], lm.end_id()));
  for (const Pending& p : pending) {
    if (p.target_position == num_positions - 1) {
      graph.finals[p.last_state] = {p.exit_logp, end_logp};
    }
  }
  graph.lm = &lm;
  graph.am = &am;
  graph.num_histories_ = num_positions;
  return graph;
}

namespace {

// Token backtrace arena: one node per emitted token.
struct TraceArena {
  struct Node {
    std::int32_t parent;
    std::int32_t token;
  };
  std::vector<Node> nodes;

  std::int32_t add(std::int32_t parent, std::int32_t token) {
    nodes.push_back({parent, token});
    return static_cast<std::int32_t>(nodes.size()) - 1;
  }
  std::vector<std::int32_t> trace(std::int32_t node) const {
    std::vector<std::int32_t> tokens;
    while (node >= 0) {
      tokens.push_back(nodes[node].token);
      node = nodes[node].parent;
    }
    std::reverse(tokens.begin(), tokens.end());
    return tokens;
  }
};

// Lexicographic comparison of traced token label sequences.
bool trace_less(const TraceArena& arena, const SearchGraph& graph,
                std::int32_t a, std::int32_t b) {
  const auto ta = arena.trace(a);
  const auto tb = arena.trace(b);
  const std::size_t n = std::min(ta.size(), tb.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& la = graph.token_labels[ta[i]];
    const std::string& lb = graph.token_labels[tb[i]];
    if (la != lb) return la < lb;
  }
  return ta.size() < tb.size();
}

double arc_score(const SearchGraph::Arc& arc, const DecodeConfig& cfg) {
  double s = arc.base_logp + cfg.language_weight * arc.lm_logp;
  if (arc.penalty == 1) s += cfg.word_insertion_penalty;
  if (arc.penalty == 2) s += cfg.filler_insertion_penalty;
  return s;
}

}  // namespace

Hypothesis decode(const FeatureSequence& features, const SearchGraph& graph,
                  const DecodeConfig& cfg) {
  cfg.validate();
  const int T = features.num_frames();
  if (T == 0) throw EmptyFeatures("cannot decode a 0-frame utterance");
  if (features.dim != graph.am->dim) {
    throw BadConfig("feature dimension " + std::to_string(features.dim) +
                    " does not match model dimension " +
                    std::to_string(graph.am->dim));
  }
  const FeatureMatrix feats = FeatureMatrix::from(features);
  const GmmScorer scorer(graph.am->pool, graph.am->dim);
  const int S = graph.num_states();

  // Emission cache per frame over the distinct pool states in the graph.
  std::vector<std::uint32_t> unique_pool(graph.pool_state.begin(),
                                         graph.pool_state.end());
  std::sort(unique_pool.begin(), unique_pool.end());
  unique_pool.erase(std::unique(unique_pool.begin(), unique_pool.end()),
                    unique_pool.end());
  std::vector<int> state_to_unique(S);
  for (int s = 0; s < S; ++s) {
    state_to_unique[s] = static_cast<int>(
        std::lower_bound(unique_pool.begin(), unique_pool.end(),
                         graph.pool_state[s]) -
        unique_pool.begin());
  }
  std::vector<double> emis(unique_pool.size());

  TraceArena arena;
  std::vector<double> prev(S, kLogZero), cur(S, kLogZero);
  std::vector<std::int32_t> prev_node(S, -1), cur_node(S, -1);

  const auto relax = [&](int to, double score, std::int32_t node) {
    if (score == kLogZero) return;
    if (score > cur[to] ||
        (score == cur[to] && trace_less(arena, graph, node, cur_node[to]))) {
      cur[to] = score;
      cur_node[to] = node;
    }
  };

  for (int t = 0; t < T; ++t) {
    for (std::size_t u = 0; u < unique_pool.size(); ++u) {
      emis[u] = scorer.log_like(unique_pool[u], feats.frame(t));
    }
    std::fill(cur.begin(), cur.end(), kLogZero);
    std::fill(cur_node.begin(), cur_node.end(), -1);
    if (t == 0) {
      for (const SearchGraph::Arc& arc : graph.entry_arcs) {
        const double s = arc_score(arc, cfg);
        if (s == kLogZero) continue;
        const std::int32_t node =
            arc.token >= 0 ? arena.add(-1, arc.token) : -1;
        relax(arc.to, s + emis[state_to_unique[arc.to]], node);
      }
    } else {
      for (int to = 0; to < S; ++to) {
        double best = kLogZero;
        std::int32_t best_node = -1;
        const SearchGraph::Arc* best_arc = nullptr;
        for (const std::int32_t ai : graph.in_arcs[to]) {
          const SearchGraph::Arc& arc = graph.arcs[ai];
          if (prev[arc.from] == kLogZero) continue;
          const double s = arc_score(arc, cfg);
          if (s == kLogZero) continue;
          const double v = prev[arc.from] + s;
          if (v > best) {
            best = v;
            best_arc = &arc;
            best_node = prev_node[arc.from];
          } else if (v == best && best_arc != nullptr) {
            // score tie: prefer the lexicographically smaller sequence
            const std::int32_t cand_node =
                arc.token >= 0 ? arena.add(prev_node[arc.from], arc.token)
                               : prev_node[arc.from];
            const std::int32_t have_node =
                best_arc->token >= 0 ? arena.add(best_node, best_arc->token)
                                     : best_node;
            if (trace_less(arena, graph, cand_node, have_node)) {
              best_arc = &arc;
              best_node = prev_node[arc.from];
            }
          }
        }
        if (best == kLogZero) continue;
        const std::int32_t node =
            best_arc->token >= 0 ? arena.add(best_node, best_arc->token)
                                 : best_node;
        cur[to] = best + emis[state_to_unique[to]];
        cur_node[to] = node;
      }
    }

    // Beam and hypothesis-count pruning.
    double best = kLogZero;
    for (int s = 0; s < S; ++s) best = std::max(best, cur[s]);
    if (best == kLogZero) {
      throw NoSurvivingPath("all hypotheses pruned at frame " +
                            std::to_string(t) +
                            " (beam too narrow or model mismatch)");
    }
    if (std::isfinite(cfg.beam_logwidth)) {
      const double threshold = best - cfg.beam_logwidth;
      for (int s = 0; s < S; ++s) {
        if (cur[s] < threshold) {
          cur[s] = kLogZero;
          cur_node[s] = -1;
        }
      }
    }
    if (cfg.max_active > 0) {
      std::vector<double> active;
      active.reserve(S);
      for (int s = 0; s < S; ++s) {
        if (cur[s] != kLogZero) active.push_back(cur[s]);
      }
      if (active.size() > cfg.max_active) {
        std::nth_element(active.begin(),
                         active.begin() + (cfg.max_active - 1), active.end(),
                         std::greater<double>());
        const double cutoff = active[cfg.max_active - 1];
        for (int s = 0; s < S; ++s) {
          if (cur[s] < cutoff) {
            cur[s] = kLogZero;
            cur_node[s] = -1;
          }
        }
      }
    }
    std::swap(prev, cur);
    std::swap(prev_node, cur_node);
  }

  double best = kLogZero;
  std::int32_t best_node = -1;
  for (int s = 0; s < S; ++s) {
    if (prev[s] == kLogZero ||
        graph.finals[s].base_logp == kLogZero) {
      continue;
    }
    const double v = prev[s] + graph.finals[s].base_logp +
                     cfg.language_weight * graph.finals[s].lm_logp;
    if (v > best ||
        (v == best && trace_less(arena, graph, prev_node[s], best_node))) {
      best = v;
      best_node = prev_node[s];
    }
  }
  if (best == kLogZero) {
    throw NoSurvivingPath("no hypothesis reached a final state");
  }

  Hypothesis hyp;
  hyp.total_score = best;
  std::vector<int> history(graph.lm->order - 1, graph.lm->start_id());
  for (const std::int32_t tok : arena.trace(best_node)) {
    const std::string& label = graph.token_labels[tok];
    hyp.tokens.push_back(label);
    if (graph.token_is_filler[tok]) {
      ++hyp.num_fillers;
    } else {
      ++hyp.num_words;
      const int wid = graph.lm->word_id(label);
      hyp.lm_score += std::log(graph.lm->prob(history, wid));
      history.push_back(wid);
    }
  }
  hyp.lm_score += std::log(graph.lm->prob(history, graph.lm->end_id()));
  hyp.acoustic_score = hyp.total_score -
                       cfg.language_weight * hyp.lm_score -
                       cfg.word_insertion_penalty * hyp.num_words -
                       cfg.filler_insertion_penalty * hyp.num_fillers;
  return hyp;
}

Hypothesis forced_score(const std::vector<std::string>& tokens,
                        const PronunciationDictionary& dict,
                        const FillerDictionary& fillers, const NGramModel& lm,
                        const AcousticModel& am, const FeatureSequence& feats,
                        const DecodeConfig& cfg) {
  const SearchGraph graph =
      SearchGraph::build_forced(tokens, dict, fillers, lm, am);
  DecodeConfig exact = cfg;
  exact.beam_logwidth = std::numeric_limits<double>::infinity();
  exact.max_active = 0;
  return decode(feats, graph, exact);
}

BatchDecodeResult batch_decode(
    const CorpusManifest& manifest, const AcousticModel& am,
    const NGramModel& lm, const DecodeConfig& cfg,
    const std::map<std::string, FeatureSequence>& features, int jobs) {
  const SearchGraph graph =
      SearchGraph::build(manifest.dictionary, manifest.fillers, lm, am);
  const auto& utterances = manifest.test.utterances;
  std::vector<std::pair<bool, Hypothesis>> done(utterances.size());
  std::vector<std::string> errors(utterances.size());

  parallel_blocks(
      utterances.size(), jobs,
      [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          const auto& utt = utterances[i];
          const auto fit = features.find(utt.id);
          if (fit == features.end()) {
            errors[i] = "no features for utterance " + utt.id;
            continue;
          }
          try {
            done[i] = {true, decode(fit->second, graph, cfg)};
          } catch (const Error& e) {
            errors[i] = e.what();
          }
        }
      });

  BatchDecodeResult result;
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    if (done[i].first) {
      result.hypotheses.emplace(utterances[i].id, std::move(done[i].second));
    } else {
      result.failures.emplace(utterances[i].id, errors[i]);
    }
  }
  return result;
}

}  // namespace tinysr
