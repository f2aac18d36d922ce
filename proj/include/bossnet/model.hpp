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

// The full encoder-decoder: BoSs memory, multi-hop encoder and copy decoder,
// with the teacher-forced loss and its analytic gradient.

#ifndef BOSSNET_MODEL_HPP_
#define BOSSNET_MODEL_HPP_

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "bossnet/boss_memory.hpp"
#include "bossnet/common.hpp"
#include "bossnet/corpus.hpp"
#include "bossnet/decoder.hpp"
#include "bossnet/encoder.hpp"
#include "bossnet/parameters.hpp"
#include "bossnet/vocabulary.hpp"

namespace bossnet {

inline constexpr double kProbabilityFloor = 1e-12;

struct LossBreakdown {
  double response = 0.0;     // L_ce
  double disentangle = 0.0;  // L_d
  double total = 0.0;        // L_ce + gamma L_d
  std::size_t steps = 0;
};

/// log(1 + exp(x)) without overflow.
template <typename T>
T softplus(T x) {
  return x > T(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

template <typename T>
class BossNet {
 public:
  BossNet() = default;
  BossNet(Vocabulary vocab, int embed_dim, int hops)
      : vocab_(std::move(vocab)), decode_vocab_(vocab_) {
    dims_.embed_dim = embed_dim;
    dims_.hops = hops;
    dims_.vocab_size = vocab_.size();
    dims_.decode_size = decode_vocab_.size();
    if (embed_dim < 1) throw ArgumentError("embed_dim must be positive");
    if (hops < 1) throw ArgumentError("hops must be >= 1");
    params_ = Parameters<T>(dims_);
  }

  const Vocabulary& vocab() const { return vocab_; }
  const DecodeVocabulary& decode_vocab() const { return decode_vocab_; }
  const ModelDims& dims() const { return dims_; }
  Parameters<T>& params() { return params_; }
  const Parameters<T>& params() const { return params_; }
  void initialize(std::uint64_t seed) { params_.initialize(seed); }

  std::vector<std::vector<int>> sequences(const ContextInstance& inst) const {
    std::vector<std::vector<int>> seqs;
    seqs.reserve(inst.memory.size() + 1);
    for (const MemoryCell& cell : inst.memory) seqs.push_back(cell_ids(cell, vocab_));
    seqs.push_back(cell_ids(inst.query, vocab_));
    return seqs;
  }

  struct Encoded {
    std::vector<std::vector<int>> seqs;
    BiGruTrace<T> bigru;
    MemoryEncoding<T> all;  // memory cells followed by the query
    DecoderMemory<T> memory;
    std::vector<HopCache<T>> hops;
    Vec<T> initial_state;
  };

  Encoded encode_context(const ContextInstance& inst, bool keep_trace) const {
    Encoded e;
    e.seqs = sequences(inst);
    e.all = encode_sequences<T>(params_, e.seqs, keep_trace ? &e.bigru : nullptr);
    const int n = static_cast<int>(inst.memory.size());
    MemoryEncoding<T> mem;
    mem.phi.assign(e.all.phi.begin(), e.all.phi.begin() + n);
    mem.psi = e.all.psi.leftCols(n);
    e.memory = make_decoder_memory<T>(mem, inst.memory, vocab_, decode_vocab_);
    e.initial_state = encode<T>(Vec<T>(e.all.psi.col(n)), e.memory.psi, params_.hop_r,
                                params_.hop_o, dims_.hops, keep_trace ? &e.hops : nullptr);
    return e;
  }

  /// Teacher-forced decoder steps over the gold response.
  std::vector<DecoderStep<T>> teacher_forced_steps(const ContextInstance& inst) const {
    Encoded e = encode_context(inst, false);
    return run_teacher_forced(inst, e);
  }

  /// L_ce + gamma L_d for one instance. When `grad` is given, adds
  /// `weight` * dL/dtheta to it.
  LossBreakdown loss(const ContextInstance& inst, double gamma, Parameters<T>* grad = nullptr,
                     double weight = 1.0) const {
    Encoded e = encode_context(inst, grad != nullptr);
    std::vector<DecoderStep<T>> steps = run_teacher_forced(inst, e);
    LossBreakdown out;
    out.steps = steps.size();

    const Eigen::Index h = dims_.state_dim();
    const int d = dims_.embed_dim;
    std::vector<Vec<T>> d_state(steps.size());
    std::vector<T> d_logit(steps.size());
    std::vector<StepTarget> targets(steps.size());
    std::vector<T> d_pg(steps.size(), T(0)), d_pc(steps.size(), T(0));

    for (std::size_t t = 0; t < steps.size(); ++t) {
      const DecoderStep<T>& st = steps[t];
      targets[t] = step_target(inst.gold_response[t], e.memory.support, vocab_, decode_vocab_);
      const T pg = targets[t].decode >= 0 ? st.pg(targets[t].decode) : T(0);
      const T pc = targets[t].copy >= 0 ? st.copy.pc(targets[t].copy) : T(0);
      const T p = st.gate * pg + (T(1) - st.gate) * pc;
      const bool floored = double(p) < kProbabilityFloor;  // NaN propagates
      out.response -= std::log(floored ? kProbabilityFloor : double(p));

      const bool kb_word = t < inst.disentangle_labels.size() && inst.disentangle_labels[t];
      // -log(1 - g) for KB words, -log(g) otherwise.
      out.disentangle += double(kb_word ? softplus(st.gate_logit) : softplus(-st.gate_logit));

      if (!grad) continue;
      const T dp = floored ? T(0) : T(-1) / p;
      const T g = st.gate_raw;
      const T target = kb_word ? T(0) : T(1);
      T du = T(gamma) * (g - target);
      if (!e.memory.empty()) du += dp * (pg - pc) * g * (T(1) - g);
      d_logit[t] = du;
      d_pg[t] = dp * st.gate;
      d_pc[t] = dp * (T(1) - st.gate);
    }
    out.total = out.response + gamma * out.disentangle;
    if (!grad) return out;

    Parameters<T>& G = *grad;
    const T w = static_cast<T>(weight);
    const Mat<T>& psi = e.memory.psi;
    const Mat<T>& phi = e.memory.phi;
    Mat<T> d_psi_mem = Mat<T>::Zero(h, psi.cols());
    Mat<T> d_phi_flat = Mat<T>::Zero(h, phi.cols());
    Vec<T> carry = Vec<T>::Zero(h);

    for (int t = static_cast<int>(steps.size()) - 1; t >= 0; --t) {
      const DecoderStep<T>& st = steps[t];
      const StepTarget& tg = targets[t];
      const Vec<T>& s = st.state;
      Vec<T> ds = Vec<T>::Zero(h);

      // Gate.
      const T du = w * d_logit[t];
      G.gate_w.head(h) += du * s;
      G.gate_w.tail(d) += du * params_.embedding.col(st.prev_id);
      G.gate_b(0) += du;
      ds += du * params_.gate_w.head(h);
      G.embedding.col(st.prev_id) += du * params_.gate_w.tail(d);

      // Generate path.
      Vec<T> d_alpha = Vec<T>::Zero(psi.cols());
      if (tg.decode >= 0 && d_pg[t] != T(0)) {
        const T a = w * d_pg[t] * st.pg(tg.decode);
        Vec<T> d_logits = -a * st.pg;
        d_logits(tg.decode) += a;
        G.out_w.noalias() += d_logits * st.gen.hidden.transpose();
        G.out_b += d_logits;
        const Vec<T> d_hidden = params_.out_w.transpose() * d_logits;
        const Vec<T> d_pre =
            (d_hidden.array() * (T(1) - st.gen.hidden.array().square())).matrix();
        G.attn_w.noalias() += d_pre * st.gen.attn_input.transpose();
        G.attn_b += d_pre;
        const Vec<T> d_input = params_.attn_w.transpose() * d_pre;
        ds += d_input.tail(h);
        if (!e.memory.empty()) {
          const Vec<T> d_ctx = d_input.head(h);
          d_alpha += psi.transpose() * d_ctx;
          d_psi_mem.noalias() += d_ctx * st.copy.alpha.transpose();
        }
      }

      // Copy path.
      if (!e.memory.empty()) {
        const CopyDistribution<T>& cd = st.copy;
        if (tg.copy >= 0 && d_pc[t] != T(0)) {
          const T dbeta = w * d_pc[t];
          const auto& where = e.memory.support.position_surface;
          for (int i = 0; i < e.memory.cells(); ++i) {
            const int a = e.memory.offsets[i];
            const int len = e.memory.offsets[i + 1] - a;
            Vec<T> d_sigma = Vec<T>::Zero(len);
            bool hit = false;
            for (int j = 0; j < len; ++j) {
              if (where[a + j] == tg.copy) {
                d_alpha(i) += dbeta * cd.token_softmax(a + j);
                d_sigma(j) = dbeta * cd.alpha(i);
                hit = true;
              }
            }
            if (!hit) continue;
            const auto sigma = cd.token_softmax.segment(a, len);
            const Vec<T> de = (sigma.array() * (d_sigma.array() - sigma.dot(d_sigma))).matrix();
            ds.noalias() += phi.middleCols(a, len) * de;
            d_phi_flat.middleCols(a, len).noalias() += s * de.transpose();
          }
        }
        const Vec<T> da =
            (cd.alpha.array() * (d_alpha.array() - cd.alpha.dot(d_alpha))).matrix();
        ds.noalias() += psi * da;
        d_psi_mem.noalias() += s * da.transpose();
      }

      // Decoder recurrence.
      const Mat<T> dh = ds + carry;
      Mat<T> dx;
      carry = gru_step_backward<T>(params_.dec, st.gru, dh, G.dec, &dx).col(0);
      G.embedding.col(st.prev_id) += dx.col(0);
    }

    // Encoder hops.
    const int n = static_cast<int>(inst.memory.size());
    Mat<T> d_psi_all = Mat<T>::Zero(h, n + 1);
    Mat<T> d_psi_hops = Mat<T>::Zero(h, n);
    const Vec<T> d_query = encode_backward<T>(psi, params_.hop_r, params_.hop_o, e.hops, carry,
                                              G.hop_r, G.hop_o, d_psi_hops);
    d_psi_all.leftCols(n) = d_psi_mem + d_psi_hops;
    d_psi_all.col(n) = d_query;

    std::vector<Mat<T>> d_phi(n + 1);
    for (int i = 0; i < n; ++i) {
      d_phi[i] = d_phi_flat.middleCols(e.memory.offsets[i],
                                       e.memory.offsets[i + 1] - e.memory.offsets[i]);
    }
    d_phi[n] = Mat<T>::Zero(h, static_cast<Eigen::Index>(e.seqs[n].size()));
    encode_sequences_backward<T>(params_, e.seqs, e.bigru, d_phi, d_psi_all, G);
    G.embedding.col(kPadId).setZero();
    return out;
  }

  /// Greedy decoding from GO; a copied argmax emits the literal memory
  /// surface.
  DecodedResponse greedy_decode(const ContextInstance& inst, int max_len = 30,
                                std::vector<DecoderStep<T>>* trace = nullptr,
                                DecoderMemory<T>* memory_out = nullptr) const {
    if (max_len < 1) throw ArgumentError("max_len must be >= 1");
    Encoded e = encode_context(inst, false);
    DecodedResponse out;
    Vec<T> s = e.initial_state;
    int prev = kGoId;
    for (int t = 0; t < max_len; ++t) {
      DecoderStep<T> st = decode_step<T>(prev, s, e.memory, params_);
      // Best generatable word, then best copy-only surface.
      T best = T(-1);
      std::string word;
      bool copied = false;
      for (int k = 0; k < decode_vocab_.size(); ++k) {
        T score = st.gate * st.pg(k);
        const std::string& tok = vocab_.token(decode_vocab_.decode_to_vocab[k]);
        const int c = e.memory.support.find(tok);
        T copy_part = c >= 0 ? (T(1) - st.gate) * st.copy.pc(c) : T(0);
        score += copy_part;
        if (score > best) {
          best = score;
          word = tok;
          copied = copy_part > st.gate * st.pg(k);
        }
      }
      for (std::size_t c = 0; c < e.memory.support.surfaces.size(); ++c) {
        if (e.memory.support.surface_decode[c] >= 0) continue;
        const T score = (T(1) - st.gate) * st.copy.pc(static_cast<Eigen::Index>(c));
        if (score > best) {
          best = score;
          word = e.memory.support.surfaces[c];
          copied = true;
        }
      }
      out.gates.push_back(double(st.gate));
      s = st.state;
      if (trace) trace->push_back(std::move(st));
      if (word == kEosToken) break;
      out.tokens.push_back(word);
      out.copied.push_back(copied);
      prev = vocab_.id(word);
    }
    if (memory_out) *memory_out = std::move(e.memory);
    return out;
  }

 private:
  std::vector<DecoderStep<T>> run_teacher_forced(const ContextInstance& inst,
                                                 const Encoded& e) const {
    std::vector<DecoderStep<T>> steps;
    steps.reserve(inst.gold_response.size());
    Vec<T> s = e.initial_state;
    for (std::size_t t = 0; t < inst.gold_response.size(); ++t) {
      const int prev = t == 0 ? kGoId : vocab_.id(inst.gold_response[t - 1]);
      steps.push_back(decode_step<T>(prev, s, e.memory, params_));
      s = steps.back().state;
    }
    return steps;
  }

  Vocabulary vocab_;
  DecodeVocabulary decode_vocab_;
  ModelDims dims_;
  Parameters<T> params_;
};

}  // namespace bossnet

#endif  // BOSSNET_MODEL_HPP_
