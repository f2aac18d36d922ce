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

// GRU cell with explicit forward caches and backpropagation.
//
//   r  = sigmoid(Wx_r x + bx_r + Wh_r h + bh_r)
//   z  = sigmoid(Wx_z x + bx_z + Wh_z h + bh_z)
//   n  = tanh(Wx_n x + bx_n + r * (Wh_n h + bh_n))
//   h' = (1 - z) * n + z * h
//
// Gate blocks are stacked [r; z; n] in w_x (3h x in), w_h (3h x h), b_x, b_h.
// Every function works on a batch of columns.

#ifndef BOSSNET_GRU_HPP_
#define BOSSNET_GRU_HPP_

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "bossnet/common.hpp"

namespace bossnet {

template <typename T>
struct GruParams {
  Mat<T> w_x;
  Mat<T> w_h;
  Vec<T> b_x;
  Vec<T> b_h;

  GruParams() = default;
  GruParams(int input, int hidden)
      : w_x(Mat<T>::Zero(3 * hidden, input)),
        w_h(Mat<T>::Zero(3 * hidden, hidden)),
        b_x(Vec<T>::Zero(3 * hidden)),
        b_h(Vec<T>::Zero(3 * hidden)) {}

  int hidden() const { return static_cast<int>(w_h.cols()); }
  int input() const { return static_cast<int>(w_x.cols()); }

  template <typename F>
  void visit(const std::string& prefix, F&& f) {
    f(prefix + ".w_x", w_x);
    f(prefix + ".w_h", w_h);
    f(prefix + ".b_x", b_x);
    f(prefix + ".b_h", b_h);
  }
};

template <typename T>
struct GruStepCache {
  Mat<T> x;
  Mat<T> h_prev;
  Mat<T> r;
  Mat<T> z;
  Mat<T> n;
  Mat<T> hn;  // Wh_n h + bh_n
};

template <typename T>
inline Mat<T> sigmoid(const Mat<T>& m) {
  return (T(1) / (T(1) + (-m.array()).exp())).matrix();
}

/// One step over columns of x (in x B) and h_prev (h x B). Returns h'.
template <typename T>
Mat<T> gru_step(const GruParams<T>& p, const Mat<T>& x, const Mat<T>& h_prev,
                GruStepCache<T>* cache = nullptr) {
  const int h = p.hidden();
  Mat<T> gx = p.w_x * x;
  gx.colwise() += p.b_x;
  Mat<T> gh = p.w_h * h_prev;
  gh.colwise() += p.b_h;
  Mat<T> r = sigmoid<T>(gx.topRows(h) + gh.topRows(h));
  Mat<T> z = sigmoid<T>(gx.middleRows(h, h) + gh.middleRows(h, h));
  Mat<T> hn = gh.bottomRows(h);
  Mat<T> n = (gx.bottomRows(h).array() + r.array() * hn.array()).tanh().matrix();
  Mat<T> out = ((T(1) - z.array()) * n.array() + z.array() * h_prev.array()).matrix();
  if (cache) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->r = std::move(r);
    cache->z = std::move(z);
    cache->n = std::move(n);
    cache->hn = std::move(hn);
  }
  return out;
}

/// Backpropagates dh (gradient w.r.t. h') through one step. Accumulates
/// parameter gradients into `grad`, writes the input gradient to `dx`, and
/// returns the gradient w.r.t. h_prev.
template <typename T>
Mat<T> gru_step_backward(const GruParams<T>& p, const GruStepCache<T>& c, const Mat<T>& dh,
                         GruParams<T>& grad, Mat<T>* dx) {
  const int h = p.hidden();
  const auto z = c.z.array();
  const auto n = c.n.array();
  const auto r = c.r.array();
  Mat<T> dn_pre = (dh.array() * (T(1) - z) * (T(1) - n * n)).matrix();
  Mat<T> dz_pre = (dh.array() * (c.h_prev.array() - n) * z * (T(1) - z)).matrix();
  Mat<T> dr_pre = (dn_pre.array() * c.hn.array() * r * (T(1) - r)).matrix();

  const Eigen::Index batch = dh.cols();
  Mat<T> gx(3 * h, batch);
  gx.topRows(h) = dr_pre;
  gx.middleRows(h, h) = dz_pre;
  gx.bottomRows(h) = dn_pre;
  Mat<T> gh(3 * h, batch);
  gh.topRows(h) = dr_pre;
  gh.middleRows(h, h) = dz_pre;
  gh.bottomRows(h) = (dn_pre.array() * r).matrix();

  grad.w_x.noalias() += gx * c.x.transpose();
  grad.b_x += gx.rowwise().sum();
  grad.w_h.noalias() += gh * c.h_prev.transpose();
  grad.b_h += gh.rowwise().sum();
  if (dx) *dx = p.w_x.transpose() * gx;
  Mat<T> dh_prev = (dh.array() * z).matrix();
  dh_prev.noalias() += p.w_h.transpose() * gh;
  return dh_prev;
}

/// Forward record of a packed run over variable-length sequences. Columns
/// are sorted by length (descending) so the sequences still active at step t
/// are a column prefix.
template <typename T>
struct PackedGruTrace {
  std::vector<int> order;    // column -> sequence index
  std::vector<int> lengths;  // per column
  bool reverse = false;
  std::vector<GruStepCache<T>> steps;
  std::vector<int> active;  // per step
};

inline std::vector<int> length_order(const std::vector<std::vector<int>>& seqs) {
  std::vector<int> order(seqs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return seqs[a].size() > seqs[b].size(); });
  return order;
}

/// Runs the GRU over every sequence of embedding ids (zero initial state).
/// outputs[s] is hidden x len(s); column j holds the state after reading
/// token j (forward) or tokens len-1..j (reverse).
template <typename T>
std::vector<Mat<T>> gru_sequences(const GruParams<T>& p, const Mat<T>& embedding,
                                  const std::vector<std::vector<int>>& seqs, bool reverse,
                                  PackedGruTrace<T>* trace = nullptr) {
  const int hidden = p.hidden();
  const int in = p.input();
  std::vector<Mat<T>> outputs(seqs.size());
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    outputs[s].resize(hidden, static_cast<Eigen::Index>(seqs[s].size()));
  }
  if (seqs.empty()) return outputs;
  const std::vector<int> order = length_order(seqs);
  const int columns = static_cast<int>(order.size());
  const int max_len = static_cast<int>(seqs[order[0]].size());
  Mat<T> state = Mat<T>::Zero(hidden, columns);
  if (trace) {
    trace->order = order;
    trace->lengths.resize(columns);
    for (int c = 0; c < columns; ++c) trace->lengths[c] = static_cast<int>(seqs[order[c]].size());
    trace->reverse = reverse;
    trace->steps.assign(max_len, {});
    trace->active.assign(max_len, 0);
  }
  for (int t = 0; t < max_len; ++t) {
    int active = 0;
    while (active < columns && static_cast<int>(seqs[order[active]].size()) > t) ++active;
    Mat<T> x(in, active);
    for (int c = 0; c < active; ++c) {
      const auto& seq = seqs[order[c]];
      const int pos = reverse ? static_cast<int>(seq.size()) - 1 - t : t;
      x.col(c) = embedding.col(seq[pos]);
    }
    Mat<T> next = gru_step<T>(p, x, state.leftCols(active),
                              trace ? &trace->steps[t] : nullptr);
    state.leftCols(active) = next;
    for (int c = 0; c < active; ++c) {
      const auto& seq = seqs[order[c]];
      const int pos = reverse ? static_cast<int>(seq.size()) - 1 - t : t;
      outputs[order[c]].col(pos) = next.col(c);
    }
    if (trace) trace->active[t] = active;
  }
  return outputs;
}

/// Backpropagation through time for gru_sequences. `d_outputs` mirrors the
/// forward outputs. Embedding gradients are added column-wise to
/// `d_embedding`.
template <typename T>
void gru_sequences_backward(const GruParams<T>& p, const std::vector<std::vector<int>>& seqs,
                            const PackedGruTrace<T>& trace, const std::vector<Mat<T>>& d_outputs,
                            GruParams<T>& grad, Mat<T>& d_embedding) {
  if (seqs.empty()) return;
  const int hidden = p.hidden();
  const int columns = static_cast<int>(trace.order.size());
  Mat<T> d_state = Mat<T>::Zero(hidden, columns);
  Mat<T> dx;
  for (int t = static_cast<int>(trace.steps.size()) - 1; t >= 0; --t) {
    const int active = trace.active[t];
    for (int c = 0; c < active; ++c) {
      const auto& seq = seqs[trace.order[c]];
      const int pos = trace.reverse ? static_cast<int>(seq.size()) - 1 - t : t;
      d_state.col(c) += d_outputs[trace.order[c]].col(pos);
    }
    Mat<T> d_prev = gru_step_backward<T>(p, trace.steps[t], d_state.leftCols(active), grad, &dx);
    d_state.leftCols(active) = d_prev;
    for (int c = 0; c < active; ++c) {
      const auto& seq = seqs[trace.order[c]];
      const int pos = trace.reverse ? static_cast<int>(seq.size()) - 1 - t : t;
      d_embedding.col(seq[pos]) += dx.col(c);
    }
  }
}

}  // namespace bossnet

#endif  // BOSSNET_GRU_HPP_
