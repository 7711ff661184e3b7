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

#include "tinysr/acoustic.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "tinysr/errors.h"
#include "tinysr/simd/kernels.h"

namespace tinysr {

namespace {
constexpr double kLogZero = -std::numeric_limits<double>::infinity();
}

std::string triphone_label(const std::string& left, const std::string& base,
                           const std::string& right) {
  return left + "-" + base + "+" + right;
}

std::string triphone_base(const std::string& label) {
  const auto dash = label.find('-');
  const auto plus = label.rfind('+');
  if (dash == std::string::npos || plus == std::string::npos || plus < dash) {
    return label;
  }
  return label.substr(dash + 1, plus - dash - 1);
}

const PhoneHmm& AcousticModel::hmm(const std::string& label) const {
  const auto it = hmms.find(label);
  if (it == hmms.end()) {
    throw UnknownToken("no HMM for phone \"" + label + "\"");
  }
  return it->second;
}

AcousticModel::Resolved AcousticModel::resolve(const std::string& base,
                                               const std::string& left,
                                               const std::string& right) const {
  if (kind == ModelKind::kContextIndependent || left.empty()) {
    const PhoneHmm& h = hmm(base);
    return {base, h.states};
  }
  const std::string label = triphone_label(left, base, right);
  const auto dedicated = hmms.find(label);
  if (dedicated != hmms.end()) {
    return {label, dedicated->second.states};
  }
  const auto tied = tying.find(label);
  if (tied != tying.end()) {
    return {base, tied->second};
  }
  const PhoneHmm& h = hmm(base);  // unseen triphone backs off to the base
  return {base, h.states};
}

namespace {

constexpr char kModelMagic[4] = {'M', 'A', 'M', '1'};
constexpr std::uint32_t kModelVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void put_f32(std::ostream& out, double v) {
  const float f = static_cast<float>(v);
  char b[4];
  std::memcpy(b, &f, 4);
  out.write(b, 4);
}

void put_str(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class ModelReader {
 public:
  ModelReader(std::istream& in, std::string name)
      : in_(in), name_(std::move(name)) {}

  std::uint32_t u32(const char* what) {
    unsigned char b[4];
    read(b, 4, what);
    return static_cast<std::uint32_t>(b[0]) |
           (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
  }
  double f32(const char* what) {
    unsigned char b[4];
    read(b, 4, what);
    float v;
    std::memcpy(&v, b, 4);
    return static_cast<double>(v);
  }
  std::string str(const char* what) {
    const std::uint32_t len = u32(what);
    if (len > (1u << 20)) {
      throw CorruptModelFile(name_ + ": implausible string length in " +
                             what);
    }
    std::string s(len, '\0');
    read(reinterpret_cast<unsigned char*>(s.data()), len, what);
    return s;
  }
  void expect_eof() {
    char extra;
    if (in_.read(&extra, 1)) {
      throw CorruptModelFile(name_ + ": trailing bytes");
    }
  }

 private:
  void read(unsigned char* dst, std::size_t n, const char* what) {
    if (!in_.read(reinterpret_cast<char*>(dst),
                  static_cast<std::streamsize>(n))) {
      throw CorruptModelFile(name_ + ": truncated " + what);
    }
  }
  std::istream& in_;
  std::string name_;
};

}  // namespace

void write_model(const AcousticModel& model,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kModelMagic, 4);
  put_u32(out, kModelVersion);
  out.put(static_cast<char>(model.kind));
  put_u32(out, static_cast<std::uint32_t>(model.dim));
  put_u32(out, static_cast<std::uint32_t>(model.hmms.size()));
  put_u32(out, static_cast<std::uint32_t>(model.mixture_count()));
  put_u32(out, static_cast<std::uint32_t>(model.pool.size()));
  put_u32(out, static_cast<std::uint32_t>(model.tying.size()));

  for (const auto& gmm : model.pool) {
    put_u32(out, static_cast<std::uint32_t>(gmm.num_components()));
    for (int c = 0; c < gmm.num_components(); ++c) {
      put_f32(out, gmm.weights[c]);
      for (double v : gmm.mean(c)) put_f32(out, v);
      for (double v : gmm.variance(c)) put_f32(out, v);
    }
  }
  for (const auto& [label, hmm] : model.hmms) {
    put_str(out, label);
    for (int s = 0; s < kNumEmittingStates; ++s) {
      put_f32(out, hmm.self_loop[s]);
      put_f32(out, hmm.forward[s]);
    }
    for (int s = 0; s < kNumEmittingStates; ++s) put_u32(out, hmm.states[s]);
  }
  for (const auto& [label, states] : model.tying) {
    for (int s = 0; s < kNumEmittingStates; ++s) {
      put_str(out, label);
      out.put(static_cast<char>(s));
      put_u32(out, states[s]);
    }
  }
  if (!out) throw Error("write failed for " + path.string());
}

AcousticModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptModelFile(path.string() + ": cannot open file");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kModelMagic, 4) != 0) {
    throw CorruptModelFile(path.string() + ": bad magic");
  }
  ModelReader r(in, path.string());
  const std::uint32_t version = r.u32("version");
  if (version != kModelVersion) {
    throw CorruptModelFile(path.string() + ": unsupported version " +
                           std::to_string(version));
  }
  AcousticModel model;
  char kind;
  if (!in.get(kind) || (kind != 0 && kind != 1)) {
    throw CorruptModelFile(path.string() + ": bad model kind");
  }
  model.kind = static_cast<ModelKind>(kind);
  model.dim = static_cast<int>(r.u32("feature dim"));
  if (model.dim <= 0 || model.dim > 4096) {
    throw CorruptModelFile(path.string() + ": implausible feature dim");
  }
  const std::uint32_t num_hmms = r.u32("phone count");
  const std::uint32_t mixture_count = r.u32("mixture count");
  const std::uint32_t pool_size = r.u32("pool size");
  const std::uint32_t num_tying = r.u32("tying entries");

  model.pool.resize(pool_size);
  for (auto& gmm : model.pool) {
    const std::uint32_t comps = r.u32("component count");
    if (comps == 0 || comps > 1024) {
      throw CorruptModelFile(path.string() + ": implausible component count");
    }
    gmm.dim = model.dim;
    gmm.weights.resize(comps);
    gmm.means.resize(static_cast<std::size_t>(comps) * model.dim);
    gmm.variances.resize(static_cast<std::size_t>(comps) * model.dim);
    for (std::uint32_t c = 0; c < comps; ++c) {
      gmm.weights[c] = r.f32("weight");
      for (int d = 0; d < model.dim; ++d) {
        gmm.means[c * model.dim + d] = r.f32("mean");
      }
      for (int d = 0; d < model.dim; ++d) {
        gmm.variances[c * model.dim + d] = r.f32("variance");
      }
    }
  }
  for (std::uint32_t i = 0; i < num_hmms; ++i) {
    PhoneHmm hmm;
    hmm.label = r.str("phone label");
    for (int s = 0; s < kNumEmittingStates; ++s) {
      hmm.self_loop[s] = r.f32("self-loop");
      hmm.forward[s] = r.f32("forward");
    }
    for (int s = 0; s < kNumEmittingStates; ++s) {
      hmm.states[s] = r.u32("state id");
      if (hmm.states[s] >= pool_size) {
        throw CorruptModelFile(path.string() + ": state id out of range for " +
                               hmm.label);
      }
    }
    if (!model.hmms.emplace(hmm.label, hmm).second) {
      throw CorruptModelFile(path.string() + ": duplicate phone " + hmm.label);
    }
  }
  for (std::uint32_t i = 0; i < num_tying; ++i) {
    for (int s = 0; s < kNumEmittingStates; ++s) {
      const std::string label = r.str("tying label");
      char idx;
      if (!in.get(idx) || idx != s) {
        throw CorruptModelFile(path.string() + ": tying map state index " +
                               "out of order for " + label);
      }
      const std::uint32_t phys = r.u32("physical id");
      if (phys >= pool_size) {
        throw CorruptModelFile(path.string() +
                               ": tying physical id out of range");
      }
      model.tying[label][s] = phys;
    }
  }
  if (model.tying.size() != num_tying) {
    throw CorruptModelFile(path.string() + ": duplicate tying labels");
  }
  if (model.mixture_count() != static_cast<int>(mixture_count) &&
      pool_size > 0) {
    throw CorruptModelFile(path.string() + ": mixture count mismatch");
  }
  r.expect_eof();
  return model;
}

double log_add(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

GmmScorer::GmmScorer(const std::vector<GaussianMixture>& pool, int dim)
    : dim_(dim) {
  constexpr double kLog2Pi = 1.8378770664093453;
  states_.resize(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const GaussianMixture& gmm = pool[i];
    PreparedState& ps = states_[i];
    ps.gmm = &gmm;
    ps.num_components = gmm.num_components();
    ps.log_norm.resize(ps.num_components);
    ps.inv_var.resize(static_cast<std::size_t>(ps.num_components) * dim);
    for (int c = 0; c < ps.num_components; ++c) {
      double log_det = 0.0;
      for (int d = 0; d < dim; ++d) {
        const double var = gmm.variances[c * dim + d];
        log_det += std::log(var);
        ps.inv_var[c * dim + d] = 1.0 / var;
      }
      const double log_w =
          gmm.weights[c] > 0.0 ? std::log(gmm.weights[c]) : kLogZero;
      ps.log_norm[c] = log_w - 0.5 * (dim * kLog2Pi + log_det);
    }
  }
}

double GmmScorer::component_log_likes(std::uint32_t state, const double* frame,
                                      double* out) const {
  const PreparedState& ps = states_[state];
  double total = kLogZero;
  for (int c = 0; c < ps.num_components; ++c) {
    const double maha = simd::ops().weighted_sqdiff(
        frame, ps.gmm->means.data() + static_cast<std::size_t>(c) * dim_,
        ps.inv_var.data() + static_cast<std::size_t>(c) * dim_, dim_);
    out[c] = ps.log_norm[c] - 0.5 * maha;
    total = log_add(total, out[c]);
  }
  return total;
}

double GmmScorer::log_like(std::uint32_t state, const double* frame) const {
  const PreparedState& ps = states_[state];
  if (ps.num_components == 1) {
    const double maha = simd::ops().weighted_sqdiff(
        frame, ps.gmm->means.data(), ps.inv_var.data(), dim_);
    return ps.log_norm[0] - 0.5 * maha;
  }
  double buf[64];
  std::vector<double> heap;
  double* out = buf;
  if (ps.num_components > 64) {
    heap.resize(ps.num_components);
    out = heap.data();
  }
  return component_log_likes(state, frame, out);
}

}  // namespace tinysr
