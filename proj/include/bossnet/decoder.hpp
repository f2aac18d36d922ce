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

// Copy-augmented decoder step.
//
// Copy path, two-level attention over the memory:
//   alpha_i  = softmax_i(s . psi_i)
//   e_ij     = s . phi_ij
//   beta_ij  = alpha_i * softmax_j(e_ij)
//   P_c(w)   = sum over positions holding surface w of beta_ij
//
// Generate path, dot attention over psi (weights equal alpha):
//   c        = sum_i alpha_i psi_i
//   h~       = tanh(W_a [c; s] + b_a)
//   P_g      = softmax(W_out h~ + b_out)
//
// Gate: g = sigmoid(w_g . [s; emb(previous token)] + b_g), and the word
// score is g P_g(w) + (1 - g) P_c(w).

#ifndef BOSSNET_DECODER_HPP_
#define BOSSNET_DECODER_HPP_

#include <string>
#include <unordered_map>
#include <vector>

#include "bossnet/boss_memory.hpp"
#include "bossnet/common.hpp"
#include "bossnet/corpus.hpp"
#include "bossnet/encoder.hpp"
#include "bossnet/gru.hpp"
#include "bossnet/parameters.hpp"

namespace bossnet {

/// Distinct memory surfaces and the map from flattened positions to them.
struct CopySupport {
  std::vector<std::string> surfaces;
  std::vector<int> position_surface;  // per flattened memory position
  std::vector<int> surface_decode;    // decode index, -1 if not generatable
  std::unordered_map<std::string, int> index;

  int find(const std::string& surface) const {
    auto it = index.find(surface);
    return it == index.end() ? -1 : it->second;
  }
};

inline CopySupport make_copy_support(const std::vector<MemoryCell>& memory, const Vocabulary& vocab,
                                     const DecodeVocabulary& dv) {
  CopySupport s;
  for (const MemoryCell& cell : memory) {
    for (const std::string& tok : cell.tokens) {
      auto [it, inserted] = s.index.emplace(tok, static_cast<int>(s.surfaces.size()));
      if (inserted) {
        s.surfaces.push_back(tok);
        s.surface_decode.push_back(vocab.contains(tok) ? dv.vocab_to_decode[vocab.id(tok)] : -1);
      }
      s.position_surface.push_back(it->second);
    }
  }
  return s;
}

/// The decoder's view of an encoded memory: psi, all phi columns
/// concatenated cell by cell, and the copy support.
template <typename T>
struct DecoderMemory {
  Mat<T> psi;
  Mat<T> phi;
  std::vector<int> offsets;  // cells + 1 entries
  CopySupport support;

  int cells() const { return static_cast<int>(psi.cols()); }
  bool empty() const { return psi.cols() == 0; }
};

template <typename T>
DecoderMemory<T> make_decoder_memory(const MemoryEncoding<T>& enc,
                                     const std::vector<MemoryCell>& memory,
                                     const Vocabulary& vocab, const DecodeVocabulary& dv) {
  DecoderMemory<T> m;
  m.psi = enc.psi;
  m.offsets.push_back(0);
  for (const auto& phi : enc.phi) m.offsets.push_back(m.offsets.back() + static_cast<int>(phi.cols()));
  m.phi.resize(enc.psi.rows(), m.offsets.back());
  for (int i = 0; i < enc.cells(); ++i) {
    m.phi.middleCols(m.offsets[i], enc.phi[i].cols()) = enc.phi[i];
  }
  m.support = make_copy_support(memory, vocab, dv);
  return m;
}

template <typename T>
struct CopyDistribution {
  Vec<T> alpha;          // per cell
  Vec<T> token_softmax;  // per flattened position, softmax within its cell
  Vec<T> beta;           // per flattened position
  Vec<T> pc;             // per support surface
};

/// Two-level copy attention. Empty memory gives empty distributions.
template <typename T>
CopyDistribution<T> copy_dist(const Vec<T>& s, const DecoderMemory<T>& m) {
  CopyDistribution<T> out;
  out.pc = Vec<T>::Zero(static_cast<Eigen::Index>(m.support.surfaces.size()));
  if (m.empty()) return out;
  out.alpha = softmax<T>(m.psi.transpose() * s);
  const Vec<T> e = m.phi.transpose() * s;
  out.token_softmax.resize(e.size());
  out.beta.resize(e.size());
  for (int i = 0; i < m.cells(); ++i) {
    const int a = m.offsets[i];
    const int len = m.offsets[i + 1] - a;
    out.token_softmax.segment(a, len) = softmax<T>(e.segment(a, len));
    out.beta.segment(a, len) = out.alpha(i) * out.token_softmax.segment(a, len);
  }
  for (Eigen::Index k = 0; k < out.beta.size(); ++k) {
    out.pc(m.support.position_surface[k]) += out.beta(k);
  }
  return out;
}

template <typename T>
struct GenerateCache {
  Vec<T> context;
  Vec<T> attn_input;  // [context; s]
  Vec<T> hidden;      // h~
};

/// P_g given the cell attention `alpha` (empty for an empty memory).
template <typename T>
Vec<T> generate_dist(const Vec<T>& s, const Vec<T>& alpha, const DecoderMemory<T>& m,
                     const Parameters<T>& p, GenerateCache<T>* cache = nullptr) {
  const Eigen::Index n = s.size();
  Vec<T> input(2 * n);
  input.head(n) = m.empty() ? Vec<T>::Zero(n) : Vec<T>(m.psi * alpha);
  input.tail(n) = s;
  Vec<T> hidden = (p.attn_w * input + p.attn_b).array().tanh().matrix();
  Vec<T> pg = softmax<T>(p.out_w * hidden + p.out_b);
  if (cache) *cache = {input.head(n), input, std::move(hidden)};
  return pg;
}

template <typename T>
Vec<T> generate_dist(const Vec<T>& s, const DecoderMemory<T>& m, const Parameters<T>& p) {
  Vec<T> alpha = m.empty() ? Vec<T>() : softmax<T>(m.psi.transpose() * s);
  return generate_dist<T>(s, alpha, m, p);
}

template <typename T>
T gate_logit(const Vec<T>& s, const Vec<T>& prev_embedding, const Parameters<T>& p) {
  const Eigen::Index n = s.size();
  return p.gate_w.head(n).dot(s) + p.gate_w.tail(prev_embedding.size()).dot(prev_embedding) +
         p.gate_b(0);
}

template <typename T>
T gate(const Vec<T>& s, const Vec<T>& prev_embedding, const Parameters<T>& p) {
  return T(1) / (T(1) + std::exp(-gate_logit<T>(s, prev_embedding, p)));
}

template <typename T>
struct DecoderStep {
  int prev_id = kGoId;
  Vec<T> state;
  Vec<T> pg;
  CopyDistribution<T> copy;
  T gate = T(1);  // as used in the word score (forced to 1 for empty memory)
  T gate_raw = T(1);
  T gate_logit = T(0);
  GenerateCache<T> gen;
  GruStepCache<T> gru;
};

/// Advances the decoder GRU by the previous token and computes P_g, P_c and
/// the gate.
template <typename T>
DecoderStep<T> decode_step(int prev_id, const Vec<T>& s_prev, const DecoderMemory<T>& m,
                           const Parameters<T>& p) {
  DecoderStep<T> step;
  step.prev_id = prev_id;
  const Mat<T> x = p.embedding.col(prev_id);
  step.state = gru_step<T>(p.dec, x, Mat<T>(s_prev), &step.gru).col(0);
  step.copy = copy_dist<T>(step.state, m);
  step.pg = generate_dist<T>(step.state, step.copy.alpha, m, p, &step.gen);
  step.gate_logit = gate_logit<T>(step.state, p.embedding.col(prev_id), p);
  step.gate_raw = T(1) / (T(1) + std::exp(-step.gate_logit));
  step.gate = m.empty() ? T(1) : step.gate_raw;
  return step;
}

/// Combined word score for a surface.
template <typename T>
T word_score(const DecoderStep<T>& step, const DecoderMemory<T>& m, const Vocabulary& vocab,
             const DecodeVocabulary& dv, const std::string& surface) {
  T score = 0;
  if (vocab.contains(surface)) {
    const int g = dv.vocab_to_decode[vocab.id(surface)];
    if (g >= 0) score += step.gate * step.pg(g);
  }
  const int c = m.support.find(surface);
  if (c >= 0) score += (T(1) - step.gate) * step.copy.pc(c);
  return score;
}

struct DecodedResponse {
  TokenList tokens;
  std::vector<double> gates;
  std::vector<bool> copied;  // true when the argmax came from a memory surface
};

/// Targets of one gold token: decode index (-1 if not generatable) and copy
/// support index (-1 if absent). A token in neither maps to UNK generation.
struct StepTarget {
  int decode = -1;
  int copy = -1;
};

inline StepTarget step_target(const std::string& gold, const CopySupport& support,
                              const Vocabulary& vocab, const DecodeVocabulary& dv) {
  StepTarget t;
  if (vocab.contains(gold)) t.decode = dv.vocab_to_decode[vocab.id(gold)];
  t.copy = support.find(gold);
  if (t.decode < 0 && t.copy < 0) t.decode = dv.unk();
  return t;
}

}  // namespace bossnet

#endif  // BOSSNET_DECODER_HPP_
