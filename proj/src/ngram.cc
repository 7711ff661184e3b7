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

#include "tinysr/ngram.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "tinysr/errors.h"

namespace tinysr {
namespace {

int lookup_sorted(const std::vector<std::string>& vocab,
                  const std::string& word) {
  const auto it = std::lower_bound(vocab.begin(), vocab.end(), word);
  if (it == vocab.end() || *it != word) return -1;
  return static_cast<int>(it - vocab.begin());
}

}  // namespace

int NGramCounts::word_id(const std::string& word) const {
  if (word == kSentenceStart) return start_id();
  return lookup_sorted(vocab, word);
}

long long NGramCounts::event_count(
    std::span<const std::string> tuple) const {
  if (tuple.empty() || tuple.size() > events.size()) return 0;
  std::vector<int> key;
  for (const auto& w : tuple) {
    const int id = word_id(w);
    if (id < 0) return 0;
    key.push_back(id);
  }
  const auto& m = events[tuple.size() - 1];
  const auto it = m.find(key);
  return it == m.end() ? 0 : it->second;
}

long long NGramCounts::context_count(
    std::span<const std::string> tuple) const {
  if (tuple.size() >= contexts.size()) return 0;
  std::vector<int> key;
  for (const auto& w : tuple) {
    const int id = word_id(w);
    if (id < 0) return 0;
    key.push_back(id);
  }
  const auto& m = contexts[tuple.size()];
  const auto it = m.find(key);
  return it == m.end() ? 0 : it->second;
}

NGramCounts count_ngrams(
    const std::vector<std::vector<std::string>>& sentences, int order) {
  if (order < 1 || order > 3) throw BadConfig("n-gram order must be 1..3");
  NGramCounts counts;
  counts.order = order;
  counts.events.resize(order);
  counts.contexts.resize(order);

  std::set<std::string> words;
  words.insert(kSentenceEnd);
  for (const auto& sentence : sentences) {
    for (const auto& w : sentence) {
      if (w == kSentenceStart || w == kSentenceEnd) {
        throw BadConfig("sentence contains reserved symbol " + w);
      }
      words.insert(w);
    }
  }
  counts.vocab.assign(words.begin(), words.end());

  const int start = counts.start_id();
  const int end = counts.word_id(kSentenceEnd);
  for (const auto& sentence : sentences) {
    // padded = <s>^(order-1) sentence </s>
    std::vector<int> padded(order - 1, start);
    for (const auto& w : sentence) padded.push_back(counts.word_id(w));
    padded.push_back(end);
    for (std::size_t pos = order - 1; pos < padded.size(); ++pos) {
      for (int k = 1; k <= order; ++k) {
        std::vector<int> context(padded.begin() + pos - (k - 1),
                                 padded.begin() + pos);
        ++counts.contexts[k - 1][context];
        context.push_back(padded[pos]);
        ++counts.events[k - 1][std::move(context)];
      }
      ++counts.num_events;
    }
  }
  return counts;
}

Smoothing Smoothing::additive(double k) {
  Smoothing s;
  s.kind = SmoothingKind::kAdditive;
  s.k = k;
  return s;
}

Smoothing Smoothing::interpolated(std::vector<double> lambdas) {
  Smoothing s;
  s.kind = SmoothingKind::kInterpolated;
  s.lambdas = std::move(lambdas);
  return s;
}

std::string Smoothing::describe() const {
  switch (kind) {
    case SmoothingKind::kLaplace:
      return "laplace";
    case SmoothingKind::kAdditive: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "additive(k=%g)", k);
      return buf;
    }
    case SmoothingKind::kInterpolated: {
      std::string out = "interpolated(";
      for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (i > 0) out += ",";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", lambdas[i]);
        out += buf;
      }
      return out + ")";
    }
  }
  return "?";
}

int NGramModel::word_id(const std::string& word) const {
  if (word == kSentenceStart) return start_id();
  return lookup_sorted(vocab, word);
}

std::size_t NGramModel::num_histories(int k) const {
  std::size_t n = 1;
  for (int i = 1; i < k; ++i) n *= static_cast<std::size_t>(vocab_size() + 1);
  return n;
}

std::size_t NGramModel::history_rank(int k,
                                     std::span<const int> history) const {
  // Uses the last k-1 symbols, padding with the start symbol.
  const std::size_t radix = static_cast<std::size_t>(vocab_size() + 1);
  std::size_t rank = 0;
  for (int i = k - 1; i >= 1; --i) {
    const int idx = static_cast<int>(history.size()) - i;
    const int sym = idx >= 0 ? history[idx] : start_id();
    rank = rank * radix + static_cast<std::size_t>(sym);
  }
  return rank;
}

double NGramModel::prob_order(int k, std::span<const int> history,
                              int word) const {
  const std::size_t rank = history_rank(k, history);
  return tables[k - 1][rank * vocab_size() + static_cast<std::size_t>(word)];
}

double NGramModel::prob(std::span<const int> history, int word) const {
  return prob_order(order, history, word);
}

NGramModel estimate(const NGramCounts& counts, const Smoothing& smoothing,
                    bool add_unk) {
  if (counts.num_events == 0) throw EmptyCorpus("no events in n-gram counts");
  if (smoothing.kind == SmoothingKind::kAdditive && smoothing.k <= 0.0) {
    throw BadConfig("additive smoothing requires k > 0");
  }
  if (smoothing.kind == SmoothingKind::kInterpolated) {
    if (static_cast<int>(smoothing.lambdas.size()) != counts.order) {
      throw BadConfig("interpolated smoothing needs one lambda per order");
    }
    double sum = 0.0;
    for (double l : smoothing.lambdas) {
      if (l < 0.0) throw BadConfig("interpolation weights must be >= 0");
      sum += l;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw BadConfig("interpolation weights must sum to 1");
    }
  }

  NGramModel model;
  model.order = counts.order;
  model.vocab = counts.vocab;
  if (add_unk && lookup_sorted(model.vocab, kUnkWord) < 0) {
    model.vocab.push_back(kUnkWord);
    std::sort(model.vocab.begin(), model.vocab.end());
  }
  model.smoothing_desc = smoothing.describe();

  const int V = model.vocab_size();
  // Model symbol id -> counts symbol id (-1 when uncounted, e.g. <UNK>).
  std::vector<int> to_counts(V + 1, -1);
  for (int i = 0; i < V; ++i) to_counts[i] = counts.word_id(model.vocab[i]);
  to_counts[V] = counts.start_id();

  const std::size_t radix = static_cast<std::size_t>(V + 1);

  // Unranks a model-side history, returning false if any symbol maps to
  // no counted symbol (then all its counts are zero).
  const auto unrank = [&](std::size_t rank, int len, std::vector<int>& out,
                          bool& counted) {
    out.resize(len);
    counted = true;
    for (int i = 0; i < len; ++i) {
      const int sym = static_cast<int>(rank % radix);
      rank /= radix;
      const int mapped = to_counts[sym];
      if (mapped < 0) counted = false;
      out[len - 1 - i] = mapped;
    }
  };

  const auto event_count = [&](int k, const std::vector<int>& context,
                               int counts_word) -> long long {
    if (counts_word < 0) return 0;
    std::vector<int> key = context;
    key.push_back(counts_word);
    const auto& m = counts.events[k - 1];
    const auto it = m.find(key);
    return it == m.end() ? 0 : it->second;
  };
  const auto context_count = [&](int k,
                                 const std::vector<int>& context) -> long long {
    const auto& m = counts.contexts[k - 1];
    const auto it = m.find(context);
    return it == m.end() ? 0 : it->second;
  };

  model.tables.resize(model.order);
  for (int k = 1; k <= model.order; ++k) {
    const std::size_t num_hist = model.num_histories(k);
    auto& table = model.tables[k - 1];
    table.assign(num_hist * V, 0.0);
    std::vector<int> context;
    bool context_counted = false;
    for (std::size_t rank = 0; rank < num_hist; ++rank) {
      unrank(rank, k - 1, context, context_counted);
      double* row = table.data() + rank * V;
      if (smoothing.kind == SmoothingKind::kLaplace ||
          smoothing.kind == SmoothingKind::kAdditive) {
        const double add =
            smoothing.kind == SmoothingKind::kLaplace ? 1.0 : smoothing.k;
        const double denom =
            (context_counted ? static_cast<double>(context_count(k, context))
                             : 0.0) +
            add * V;
        for (int w = 0; w < V; ++w) {
          const long long c =
              context_counted ? event_count(k, context, to_counts[w]) : 0;
          row[w] = (static_cast<double>(c) + add) / denom;
        }
      } else {
        // Interpolated: mix maximum-likelihood estimates of every order
        // j <= k over the matching history suffix; zero-count ML terms
        // contribute 0; then floor and renormalize the row. Tables below
        // the model order reuse the lambda prefix, renormalized.
        double lambda_sum = 0.0;
        for (int j = 1; j <= k; ++j) lambda_sum += smoothing.lambdas[j - 1];
        double row_sum = 0.0;
        for (int w = 0; w < V; ++w) {
          double p = 0.0;
          for (int j = 1; j <= k; ++j) {
            const double lambda =
                lambda_sum > 0.0 ? smoothing.lambdas[j - 1] / lambda_sum
                                 : (j == k ? 1.0 : 0.0);
            if (lambda == 0.0) continue;
            const std::vector<int> suffix(context.end() - (j - 1),
                                          context.end());
            bool suffix_counted = true;
            for (int s : suffix) suffix_counted = suffix_counted && s != -1;
            if (!suffix_counted) continue;
            const long long ctx = context_count(j, suffix);
            if (ctx == 0) continue;
            const long long c = event_count(j, suffix, to_counts[w]);
            p += lambda * static_cast<double>(c) / static_cast<double>(ctx);
          }
          row[w] = p;
          row_sum += p;
        }
        const double eps = smoothing.epsilon;
        const double denom = row_sum + eps * V;
        for (int w = 0; w < V; ++w) row[w] = (row[w] + eps) / denom;
      }
    }
  }
  return model;
}

PerplexityResult perplexity(
    const NGramModel& model,
    const std::vector<std::vector<std::string>>& sentences) {
  PerplexityResult result;
  const int unk = model.unk_id();
  const int end = model.end_id();
  std::vector<int> history;
  for (const auto& sentence : sentences) {
    history.assign(model.order - 1, model.start_id());
    for (const auto& token : sentence) {
      int id = model.word_id(token);
      if (id < 0 || id == model.start_id()) {
        if (unk < 0) {
          throw OovToken("token \"" + token +
                         "\" is outside the vocabulary and no " + kUnkWord +
                         " is configured");
        }
        id = unk;
      }
      result.log2_prob_total += std::log2(model.prob(history, id));
      ++result.num_events;
      history.push_back(id);
    }
    result.log2_prob_total += std::log2(model.prob(history, end));
    ++result.num_events;
  }
  if (result.num_events > 0) {
    result.perplexity = std::exp2(-result.log2_prob_total /
                                  static_cast<double>(result.num_events));
  }
  return result;
}

namespace {

// Writing float32(log10 p) and mapping back through pow(10, .) is
// idempotent: the double log10 of the reconstructed value rounds back
// to the same float32.
float log10_f32(double p) { return static_cast<float>(std::log10(p)); }

std::string tuple_words(const NGramModel& model, int k, std::size_t rank,
                        int w) {
  const std::size_t radix = static_cast<std::size_t>(model.vocab_size() + 1);
  std::vector<int> syms(k - 1);
  for (int i = k - 2; i >= 0; --i) {
    syms[i] = static_cast<int>(rank % radix);
    rank /= radix;
  }
  std::string out;
  for (int s : syms) {
    out += (s == model.start_id()) ? kSentenceStart : model.vocab[s];
    out += ' ';
  }
  out += model.vocab[w];
  return out;
}

}  // namespace

void write_arpa(const NGramModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "\\data\\\n";
  for (int k = 1; k <= model.order; ++k) {
    out << "ngram " << k << "="
        << model.num_histories(k) * model.vocab_size() << "\n";
  }
  char buf[64];
  for (int k = 1; k <= model.order; ++k) {
    out << "\n\\" << k << "-grams:\n";
    const auto& table = model.tables[k - 1];
    const std::size_t num_hist = model.num_histories(k);
    for (std::size_t rank = 0; rank < num_hist; ++rank) {
      for (int w = 0; w < model.vocab_size(); ++w) {
        std::snprintf(buf, sizeof(buf), "%.7f",
                      std::log10(table[rank * model.vocab_size() + w]));
        out << buf << ' ' << tuple_words(model, k, rank, w) << "\n";
      }
    }
  }
  out << "\n\\end\\\n";
  if (!out) throw Error("write failed for " + path.string());
}

NGramModel read_arpa(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptLmFile(path.string() + ": cannot open file");
  const std::string name = path.string();

  std::string line;
  // Locate the \data\ header.
  bool found = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "\\data\\") {
      found = true;
      break;
    }
    if (!line.empty()) break;
  }
  if (!found) throw CorruptLmFile(name + ": missing \\data\\ header");

  std::vector<std::size_t> declared;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) break;
    std::size_t count = 0;
    int order = 0;
    if (std::sscanf(line.c_str(), "ngram %d=%zu", &order, &count) != 2 ||
        order != static_cast<int>(declared.size()) + 1) {
      throw CorruptLmFile(name + ": malformed ngram count line: " + line);
    }
    declared.push_back(count);
  }
  if (declared.empty() || declared.size() > 3) {
    throw CorruptLmFile(name + ": unsupported order " +
                        std::to_string(declared.size()));
  }

  // Read the raw (log10 prob, tuple) lines per section.
  const int order = static_cast<int>(declared.size());
  std::vector<std::vector<std::pair<double, std::vector<std::string>>>>
      sections(order);
  int current = -1;
  bool saw_end = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "\\end\\") {
      saw_end = true;
      break;
    }
    if (line[0] == '\\') {
      int k = 0;
      if (std::sscanf(line.c_str(), "\\%d-grams:", &k) != 1 || k < 1 ||
          k > order) {
        throw CorruptLmFile(name + ": unexpected section header: " + line);
      }
      current = k - 1;
      continue;
    }
    if (current < 0) {
      throw CorruptLmFile(name + ": entry before any section header");
    }
    std::istringstream ls(line);
    double logp = 0.0;
    if (!(ls >> logp)) {
      throw CorruptLmFile(name + ": malformed entry: " + line);
    }
    std::vector<std::string> words;
    std::string w;
    while (ls >> w) words.push_back(w);
    if (static_cast<int>(words.size()) != current + 1) {
      throw CorruptLmFile(name + ": entry arity mismatch in section " +
                          std::to_string(current + 1) + ": " + line);
    }
    sections[current].emplace_back(logp, std::move(words));
  }
  if (!saw_end) throw CorruptLmFile(name + ": missing \\end\\");
  for (int k = 0; k < order; ++k) {
    if (sections[k].size() != declared[k]) {
      throw CorruptLmFile(name + ": section " + std::to_string(k + 1) +
                          " declares " + std::to_string(declared[k]) +
                          " entries but lists " +
                          std::to_string(sections[k].size()));
    }
  }

  NGramModel model;
  model.order = order;
  model.smoothing_desc = "arpa";
  std::set<std::string> words;
  for (const auto& [logp, tuple] : sections[0]) {
    (void)logp;
    if (tuple[0] == kSentenceStart) {
      throw CorruptLmFile(name + ": <s> listed as a unigram event");
    }
    if (!words.insert(tuple[0]).second) {
      throw CorruptLmFile(name + ": duplicate unigram " + tuple[0]);
    }
  }
  model.vocab.assign(words.begin(), words.end());
  const int V = model.vocab_size();
  if (static_cast<std::size_t>(V) != declared[0]) {
    throw CorruptLmFile(name + ": unigram count mismatch");
  }

  model.tables.resize(order);
  for (int k = 1; k <= order; ++k) {
    auto& table = model.tables[k - 1];
    table.assign(model.num_histories(k) * V, -1.0);
    for (const auto& [logp, tuple] : sections[k - 1]) {
      std::vector<int> context;
      for (int i = 0; i + 1 < static_cast<int>(tuple.size()); ++i) {
        const int id = model.word_id(tuple[i]);
        if (id < 0) {
          throw CorruptLmFile(name + ": unknown context word " + tuple[i]);
        }
        context.push_back(id);
      }
      const int w = model.word_id(tuple.back());
      if (w < 0 || w == model.start_id()) {
        throw CorruptLmFile(name + ": unknown or reserved predicted word " +
                            tuple.back());
      }
      double& slot =
          table[model.history_rank(k, context) * V + static_cast<std::size_t>(w)];
      if (slot >= 0.0) {
        throw CorruptLmFile(name + ": duplicate entry in section " +
                            std::to_string(k));
      }
      slot = std::pow(10.0, logp);
    }
    for (double p : table) {
      if (p < 0.0) {
        throw CorruptLmFile(name + ": section " + std::to_string(k) +
                            " does not cover the full table");
      }
    }
  }
  return model;
}

namespace {

constexpr char kLmMagic[4] = {'M', 'L', 'M', '1'};
constexpr std::uint32_t kLmVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v & 0xffffffffu));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

void put_f32(std::ostream& out, float v) {
  static_assert(sizeof(float) == 4);
  char b[4];
  std::memcpy(b, &v, 4);
  out.write(b, 4);
}

class BinReader {
 public:
  BinReader(std::istream& in, std::string name)
      : in_(in), name_(std::move(name)) {}

  std::uint32_t u32(const char* what) {
    unsigned char b[4];
    read(b, 4, what);
    return static_cast<std::uint32_t>(b[0]) |
           (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
  }
  std::uint64_t u64(const char* what) {
    const std::uint64_t lo = u32(what);
    const std::uint64_t hi = u32(what);
    return lo | (hi << 32);
  }
  float f32(const char* what) {
    unsigned char b[4];
    read(b, 4, what);
    float v;
    std::memcpy(&v, b, 4);
    return v;
  }
  std::uint8_t u8(const char* what) {
    unsigned char b;
    read(&b, 1, what);
    return b;
  }
  std::string str(const char* what) {
    const std::uint32_t len = u32(what);
    if (len > (1u << 20)) {
      throw CorruptLmFile(name_ + ": implausible string length in " + what);
    }
    std::string s(len, '\0');
    read(reinterpret_cast<unsigned char*>(s.data()), len, what);
    return s;
  }
  void expect_eof() {
    char extra;
    if (in_.read(&extra, 1)) {
      throw CorruptLmFile(name_ + ": trailing bytes");
    }
  }
  const std::string& name() const { return name_; }

 private:
  void read(unsigned char* dst, std::size_t n, const char* what) {
    if (!in_.read(reinterpret_cast<char*>(dst),
                  static_cast<std::streamsize>(n))) {
      throw CorruptLmFile(name_ + ": truncated " + what);
    }
  }
  std::istream& in_;
  std::string name_;
};

}  // namespace

void write_binary(const NGramModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kLmMagic, 4);
  put_u32(out, kLmVersion);
  out.put(static_cast<char>(model.order));
  put_u32(out, static_cast<std::uint32_t>(model.vocab_size()));
  for (const auto& w : model.vocab) {
    put_u32(out, static_cast<std::uint32_t>(w.size()));
    out.write(w.data(), static_cast<std::streamsize>(w.size()));
  }
  const int V = model.vocab_size();
  const std::size_t radix = static_cast<std::size_t>(V + 1);
  for (int k = 1; k <= model.order; ++k) {
    const auto& table = model.tables[k - 1];
    put_u64(out, table.size());
    std::vector<std::uint32_t> syms(k - 1);
    for (std::size_t rank = 0; rank < model.num_histories(k); ++rank) {
      std::size_t r = rank;
      for (int i = k - 2; i >= 0; --i) {
        syms[i] = static_cast<std::uint32_t>(r % radix);
        r /= radix;
      }
      for (int w = 0; w < V; ++w) {
        for (std::uint32_t s : syms) put_u32(out, s);
        put_u32(out, static_cast<std::uint32_t>(w));
        put_f32(out, log10_f32(table[rank * V + w]));
      }
    }
  }
  if (!out) throw Error("write failed for " + path.string());
}

NGramModel read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptLmFile(path.string() + ": cannot open file");
  BinReader r(in, path.string());

  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kLmMagic, 4) != 0) {
    throw CorruptLmFile(path.string() + ": bad magic");
  }
  const std::uint32_t version = r.u32("version");
  if (version != kLmVersion) {
    throw CorruptLmFile(path.string() + ": unsupported version " +
                        std::to_string(version));
  }
  NGramModel model;
  model.order = r.u8("order");
  if (model.order < 1 || model.order > 3) {
    throw CorruptLmFile(path.string() + ": unsupported order " +
                        std::to_string(model.order));
  }
  model.smoothing_desc = "binary";
  const std::uint32_t V = r.u32("vocabulary size");
  if (V == 0) throw CorruptLmFile(path.string() + ": empty vocabulary");
  model.vocab.reserve(V);
  for (std::uint32_t i = 0; i < V; ++i) model.vocab.push_back(r.str("vocab"));
  if (!std::is_sorted(model.vocab.begin(), model.vocab.end())) {
    throw CorruptLmFile(path.string() + ": vocabulary is not sorted");
  }

  model.tables.resize(model.order);
  for (int k = 1; k <= model.order; ++k) {
    const std::uint64_t count = r.u64("entry count");
    const std::uint64_t expected = model.num_histories(k) * V;
    if (count != expected) {
      throw CorruptLmFile(path.string() + ": order " + std::to_string(k) +
                          " declares " + std::to_string(count) +
                          " entries, expected " + std::to_string(expected));
    }
    auto& table = model.tables[k - 1];
    table.assign(count, -1.0);
    std::vector<int> context(k - 1);
    for (std::uint64_t e = 0; e < count; ++e) {
      for (int i = 0; i < k - 1; ++i) {
        const std::uint32_t s = r.u32("context symbol");
        if (s > V) {
          throw CorruptLmFile(path.string() + ": symbol index out of range");
        }
        context[i] = static_cast<int>(s);
      }
      const std::uint32_t w = r.u32("word index");
      if (w >= V) {
        throw CorruptLmFile(path.string() + ": word index out of range");
      }
      double& slot = table[model.history_rank(k, context) * V + w];
      if (slot >= 0.0) {
        throw CorruptLmFile(path.string() + ": duplicate entry at order " +
                            std::to_string(k));
      }
      slot = std::pow(10.0, static_cast<double>(r.f32("probability")));
    }
    for (double p : table) {
      if (p < 0.0) {
        throw CorruptLmFile(path.string() + ": order " + std::to_string(k) +
                            " does not cover the full table");
      }
    }
  }
  r.expect_eof();
  return model;
}

}  // namespace tinysr
