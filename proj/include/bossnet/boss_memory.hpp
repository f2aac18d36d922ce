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

// Bag-of-sequences memory: one bidirectional GRU, shared by every cell,
// gives token representations phi and cell representations psi.
//
//   phi(w_i^j) = [fwd_i^j ; bwd_i^j]
//   psi(m_i)   = [fwd_i^last ; bwd_i^first]

#ifndef BOSSNET_BOSS_MEMORY_HPP_
#define BOSSNET_BOSS_MEMORY_HPP_

#include <vector>

#include "bossnet/common.hpp"
#include "bossnet/corpus.hpp"
#include "bossnet/gru.hpp"
#include "bossnet/parameters.hpp"
#include "bossnet/vocabulary.hpp"

namespace bossnet {

/// Token and cell representations. phi[i] is 2d x |m_i| (one column per
/// token); psi is 2d x cells.
template <typename T>
struct MemoryEncoding {
  std::vector<Mat<T>> phi;
  Mat<T> psi;

  int cells() const { return static_cast<int>(phi.size()); }
};

template <typename T>
struct CellEncoding {
  Mat<T> phi;
  Vec<T> psi;
};

template <typename T>
struct BiGruTrace {
  PackedGruTrace<T> fwd;
  PackedGruTrace<T> bwd;
};

/// Embedding ids of a cell; masked positions map to UNK.
inline std::vector<int> cell_ids(const MemoryCell& cell, const Vocabulary& vocab) {
  std::vector<int> ids(cell.tokens.size());
  for (std::size_t j = 0; j < ids.size(); ++j) {
    ids[j] = cell.masked(j) ? kUnkId : vocab.id(cell.tokens[j]);
  }
  return ids;
}

/// Encodes every sequence with the shared BiGRU. Sequences are independent.
template <typename T>
MemoryEncoding<T> encode_sequences(const Parameters<T>& p, const std::vector<std::vector<int>>& seqs,
                                   BiGruTrace<T>* trace = nullptr) {
  for (const auto& s : seqs) {
    if (s.empty()) throw ArgumentError("cannot encode an empty memory cell");
  }
  const int d = p.enc_fwd.hidden();
  auto fwd = gru_sequences<T>(p.enc_fwd, p.embedding, seqs, false, trace ? &trace->fwd : nullptr);
  auto bwd = gru_sequences<T>(p.enc_bwd, p.embedding, seqs, true, trace ? &trace->bwd : nullptr);
  MemoryEncoding<T> enc;
  enc.phi.resize(seqs.size());
  enc.psi.resize(2 * d, static_cast<Eigen::Index>(seqs.size()));
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const Eigen::Index len = static_cast<Eigen::Index>(seqs[i].size());
    enc.phi[i].resize(2 * d, len);
    enc.phi[i].topRows(d) = fwd[i];
    enc.phi[i].bottomRows(d) = bwd[i];
    enc.psi.col(i).head(d) = fwd[i].col(len - 1);
    enc.psi.col(i).tail(d) = bwd[i].col(0);
  }
  return enc;
}

/// Gradients of phi and psi back into the encoder GRUs and the embedding.
template <typename T>
void encode_sequences_backward(const Parameters<T>& p, const std::vector<std::vector<int>>& seqs,
                               const BiGruTrace<T>& trace, const std::vector<Mat<T>>& d_phi,
                               const Mat<T>& d_psi, Parameters<T>& grad) {
  const int d = p.enc_fwd.hidden();
  std::vector<Mat<T>> d_fwd(seqs.size()), d_bwd(seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const Eigen::Index len = static_cast<Eigen::Index>(seqs[i].size());
    d_fwd[i] = d_phi[i].topRows(d);
    d_bwd[i] = d_phi[i].bottomRows(d);
    d_fwd[i].col(len - 1) += d_psi.col(i).head(d);
    d_bwd[i].col(0) += d_psi.col(i).tail(d);
  }
  gru_sequences_backward<T>(p.enc_fwd, seqs, trace.fwd, d_fwd, grad.enc_fwd, grad.embedding);
  gru_sequences_backward<T>(p.enc_bwd, seqs, trace.bwd, d_bwd, grad.enc_bwd, grad.embedding);
}

template <typename T>
CellEncoding<T> encode_cell(const MemoryCell& cell, const Vocabulary& vocab,
                            const Parameters<T>& p) {
  auto enc = encode_sequences<T>(p, {cell_ids(cell, vocab)});
  return {std::move(enc.phi[0]), enc.psi.col(0)};
}

template <typename T>
struct EncodedContext {
  MemoryEncoding<T> memory;
  Vec<T> query_psi;
};

/// Encodes the memory cells and the query with the same parameters; the
/// query contributes only its psi.
template <typename T>
EncodedContext<T> encode_memory(const ContextInstance& instance, const Vocabulary& vocab,
                                const Parameters<T>& p) {
  std::vector<std::vector<int>> seqs;
  for (const MemoryCell& cell : instance.memory) seqs.push_back(cell_ids(cell, vocab));
  seqs.push_back(cell_ids(instance.query, vocab));
  MemoryEncoding<T> all = encode_sequences<T>(p, seqs);
  EncodedContext<T> out;
  out.query_psi = all.psi.col(all.cells() - 1);
  all.phi.pop_back();
  out.memory.phi = std::move(all.phi);
  out.memory.psi = all.psi.leftCols(all.psi.cols() - 1);
  return out;
}

}  // namespace bossnet

#endif  // BOSSNET_BOSS_MEMORY_HPP_
