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

// Multi-hop attention over cell representations. One hop:
//
//   p   = softmax_i(q . psi_i)
//   o   = W_r sum_i p_i psi_i
//   q_r = o + W_o q
//
// The same (W_r, W_o) pair is reused at every hop.

#ifndef BOSSNET_ENCODER_HPP_
#define BOSSNET_ENCODER_HPP_

#include <vector>

#include "bossnet/common.hpp"

namespace bossnet {

/// Softmax with max subtraction.
template <typename T>
Vec<T> softmax(const Vec<T>& logits) {
  if (logits.size() == 0) return logits;
  Vec<T> e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

template <typename T>
struct HopParams {
  Mat<T> w_r;
  Mat<T> w_o;
};

template <typename T>
struct HopCache {
  Vec<T> q;
  Vec<T> p;  // attention over cells, empty for empty memory
  Vec<T> u;  // sum_i p_i psi_i
};

/// One hop. With no cells the readout is zero and q_r = W_o q.
template <typename T>
Vec<T> hop(const Vec<T>& q, const Mat<T>& psi, const Mat<T>& w_r, const Mat<T>& w_o,
           HopCache<T>* cache = nullptr) {
  Vec<T> out = w_o * q;
  Vec<T> p, u;
  if (psi.cols() > 0) {
    p = softmax<T>(psi.transpose() * q);
    u = psi * p;
    out.noalias() += w_r * u;
  } else {
    u = Vec<T>::Zero(q.size());
  }
  if (cache) *cache = {q, std::move(p), std::move(u)};
  return out;
}

template <typename T>
Vec<T> hop(const Vec<T>& q, const Mat<T>& psi, const HopParams<T>& params) {
  return hop<T>(q, psi, params.w_r, params.w_o);
}

/// Applies `hops` tied hops starting from the query representation.
template <typename T>
Vec<T> encode(const Vec<T>& query_psi, const Mat<T>& psi, const Mat<T>& w_r, const Mat<T>& w_o,
              int hops, std::vector<HopCache<T>>* caches = nullptr) {
  if (hops < 1) throw ArgumentError("hops must be >= 1");
  if (caches) caches->assign(hops, {});
  Vec<T> q = query_psi;
  for (int k = 0; k < hops; ++k) q = hop<T>(q, psi, w_r, w_o, caches ? &(*caches)[k] : nullptr);
  return q;
}

template <typename T>
Vec<T> encode(const Vec<T>& query_psi, const Mat<T>& psi, const HopParams<T>& params, int hops) {
  return encode<T>(query_psi, psi, params.w_r, params.w_o, hops);
}

/// Backward through the hop chain. Adds to the W_r/W_o and psi gradients and
/// returns the gradient w.r.t. the query representation.
template <typename T>
Vec<T> encode_backward(const Mat<T>& psi, const Mat<T>& w_r, const Mat<T>& w_o,
                       const std::vector<HopCache<T>>& caches, const Vec<T>& d_out,
                       Mat<T>& d_w_r, Mat<T>& d_w_o, Mat<T>& d_psi) {
  Vec<T> dq = d_out;
  for (int k = static_cast<int>(caches.size()) - 1; k >= 0; --k) {
    const HopCache<T>& c = caches[k];
    d_w_o.noalias() += dq * c.q.transpose();
    Vec<T> d_prev = w_o.transpose() * dq;
    if (psi.cols() > 0) {
      d_w_r.noalias() += dq * c.u.transpose();
      const Vec<T> du = w_r.transpose() * dq;
      const Vec<T> dp = psi.transpose() * du;
      d_psi.noalias() += du * c.p.transpose();
      const Vec<T> da = (c.p.array() * (dp.array() - c.p.dot(dp))).matrix();
      d_prev.noalias() += psi * da;
      d_psi.noalias() += c.q * da.transpose();
    }
    dq = std::move(d_prev);
  }
  return dq;
}

}  // namespace bossnet

#endif  // BOSSNET_ENCODER_HPP_
