// Copyright 2026 The BossNet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BOSSNET_PARAMETERS_HPP_
#define BOSSNET_PARAMETERS_HPP_

#include <random>
#include <string>
#include <vector>

#include "bossnet/common.hpp"
#include "bossnet/gru.hpp"
#include "bossnet/vocabulary.hpp"

namespace bossnet {

/// d is the per-direction GRU width; memory, query and decoder vectors are
/// 2d wide.
struct ModelDims {
  int embed_dim = 128;
  int vocab_size = 0;
  int hops = 1;
  int decode_size = 0;

  int state_dim() const { return 2 * embed_dim; }
};

/// Generation targets: every vocabulary entry except PAD, GO and the
/// indicator tokens.
struct DecodeVocabulary {
  std::vector<int> decode_to_vocab;
  std::vector<int> vocab_to_decode;  // -1 when not generatable

  DecodeVocabulary() = default;
  explicit DecodeVocabulary(const Vocabulary& vocab) {
    vocab_to_decode.assign(vocab.size(), -1);
    for (int id = 0; id < vocab.size(); ++id) {
      if (id == kPadId || id == kGoId || is_indicator(vocab.token(id))) continue;
      vocab_to_decode[id] = static_cast<int>(decode_to_vocab.size());
      decode_to_vocab.push_back(id);
    }
  }
  int size() const { return static_cast<int>(decode_to_vocab.size()); }
  int unk() const { return vocab_to_decode[kUnkId]; }
  int eos() const { return vocab_to_decode[kEosId]; }
};

template <typename T>
struct Parameters {
  Mat<T> embedding;  // d x V, column per token; column PAD stays zero
  GruParams<T> enc_fwd;
  GruParams<T> enc_bwd;
  Mat<T> hop_r;  // 2d x 2d
  Mat<T> hop_o;  // 2d x 2d
  GruParams<T> dec;
  Mat<T> attn_w;  // 2d x 4d, over [context; state]
  Vec<T> attn_b;
  Mat<T> out_w;  // decode_size x 2d
  Vec<T> out_b;
  Vec<T> gate_w;  // over [state; previous-token embedding]
  Vec<T> gate_b;  // 1

  Parameters() = default;
  explicit Parameters(const ModelDims& dims) {
    const int d = dims.embed_dim;
    const int s = dims.state_dim();
    embedding = Mat<T>::Zero(d, dims.vocab_size);
    enc_fwd = GruParams<T>(d, d);
    enc_bwd = GruParams<T>(d, d);
    hop_r = Mat<T>::Zero(s, s);
    hop_o = Mat<T>::Zero(s, s);
    dec = GruParams<T>(d, s);
    attn_w = Mat<T>::Zero(s, 2 * s);
    attn_b = Vec<T>::Zero(s);
    out_w = Mat<T>::Zero(dims.decode_size, s);
    out_b = Vec<T>::Zero(dims.decode_size);
    gate_w = Vec<T>::Zero(s + d);
    gate_b = Vec<T>::Zero(1);
  }

  /// Calls f(name, tensor) for every parameter tensor in a fixed order.
  template <typename F>
  void visit(F&& f) {
    f(std::string("embedding"), embedding);
    enc_fwd.visit("enc_fwd", f);
    enc_bwd.visit("enc_bwd", f);
    f(std::string("hop_r"), hop_r);
    f(std::string("hop_o"), hop_o);
    dec.visit("dec", f);
    f(std::string("attn_w"), attn_w);
    f(std::string("attn_b"), attn_b);
    f(std::string("out_w"), out_w);
    f(std::string("out_b"), out_b);
    f(std::string("gate_w"), gate_w);
    f(std::string("gate_b"), gate_b);
  }
  template <typename F>
  void visit(F&& f) const {
    const_cast<Parameters*>(this)->visit(
        [&](const std::string& name, const auto& m) { f(name, m); });
  }

  void set_zero() {
    visit([](const std::string&, auto& m) { m.setZero(); });
  }

  std::size_t count() const {
    std::size_t n = 0;
    visit([&](const std::string&, const auto& m) { n += static_cast<std::size_t>(m.size()); });
    return n;
  }

  /// Weights uniform in [-scale, scale]; biases zero; PAD embedding zero.
  void initialize(std::uint64_t seed, T scale = T(0.08)) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-double(scale), double(scale));
    visit([&](const std::string& name, auto& m) {
      const bool bias = name.find(".b_") != std::string::npos || name == "attn_b" ||
                        name == "out_b" || name == "gate_b";
      for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = bias ? T(0) : static_cast<T>(uniform(rng));
      }
    });
    embedding.col(kPadId).setZero();
  }

  template <typename U>
  Parameters<U> cast() const {
    Parameters<U> out;
    auto convert = [](const auto& m) { return m.template cast<U>().eval(); };
    out.embedding = convert(embedding);
    auto gru = [&](const GruParams<T>& g) {
      GruParams<U> o;
      o.w_x = convert(g.w_x);
      o.w_h = convert(g.w_h);
      o.b_x = convert(g.b_x);
      o.b_h = convert(g.b_h);
      return o;
    };
    out.enc_fwd = gru(enc_fwd);
    out.enc_bwd = gru(enc_bwd);
    out.hop_r = convert(hop_r);
    out.hop_o = convert(hop_o);
    out.dec = gru(dec);
    out.attn_w = convert(attn_w);
    out.attn_b = convert(attn_b);
    out.out_w = convert(out_w);
    out.out_b = convert(out_b);
    out.gate_w = convert(gate_w);
    out.gate_b = convert(gate_b);
    return out;
  }
};

}  // namespace bossnet

#endif  // BOSSNET_PARAMETERS_HPP_
