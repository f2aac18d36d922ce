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

// Response-level evaluation: exact-match accuracies, corpus BLEU-4 and
// micro entity F1.

#ifndef BOSSNET_METRICS_HPP_
#define BOSSNET_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bossnet/common.hpp"
#include "json.hpp"

namespace bossnet {

using Responses = std::vector<TokenList>;

inline double per_response_accuracy(const Responses& pred, const Responses& gold) {
  if (pred.size() != gold.size()) throw ArgumentError("prediction/gold count mismatch");
  if (gold.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += pred[i] == gold[i];
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

/// `dialog_sizes` partitions the response list into consecutive dialogs.
inline double per_dialog_accuracy(const Responses& pred, const Responses& gold,
                                  const std::vector<std::size_t>& dialog_sizes) {
  if (pred.size() != gold.size()) throw ArgumentError("prediction/gold count mismatch");
  std::size_t total = 0;
  for (std::size_t n : dialog_sizes) {
    if (n == 0) throw ArgumentError("empty dialog in partition");
    total += n;
  }
  if (total != gold.size()) throw ArgumentError("dialog sizes do not partition the responses");
  if (dialog_sizes.empty()) return 0.0;
  std::size_t ok = 0, pos = 0;
  for (std::size_t n : dialog_sizes) {
    bool all = true;
    for (std::size_t k = 0; k < n; ++k, ++pos) all = all && pred[pos] == gold[pos];
    ok += all;
  }
  return static_cast<double>(ok) / static_cast<double>(dialog_sizes.size());
}

namespace detail {

inline std::map<std::vector<std::string>, int> ngram_counts(const TokenList& s, std::size_t n) {
  std::map<std::vector<std::string>, int> counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    ++counts[std::vector<std::string>(s.begin() + long(i), s.begin() + long(i + n))];
  }
  return counts;
}

}  // namespace detail

/// Corpus BLEU-4, uniform weights, brevity penalty, no smoothing, scaled to
/// [0, 100].
inline double bleu(const Responses& pred, const Responses& gold) {
  if (pred.size() != gold.size()) throw ArgumentError("prediction/gold count mismatch");
  if (gold.empty()) throw ArgumentError("BLEU of an empty corpus");
  double matches[4] = {0, 0, 0, 0};
  double totals[4] = {0, 0, 0, 0};
  double hyp_len = 0, ref_len = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    hyp_len += static_cast<double>(pred[i].size());
    ref_len += static_cast<double>(gold[i].size());
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto hyp = detail::ngram_counts(pred[i], n);
      const auto ref = detail::ngram_counts(gold[i], n);
      for (const auto& [gram, count] : hyp) {
        auto it = ref.find(gram);
        if (it != ref.end()) matches[n - 1] += std::min(count, it->second);
        totals[n - 1] += count;
      }
    }
  }
  // Orders the hypothesis has no n-grams of (all responses shorter than n)
  // are left out of the geometric mean.
  double log_sum = 0;
  int orders = 0;
  for (int n = 0; n < 4; ++n) {
    if (totals[n] == 0) continue;
    if (matches[n] == 0) return 0.0;
    log_sum += std::log(matches[n] / totals[n]);
    ++orders;
  }
  if (orders == 0) return hyp_len == ref_len ? 100.0 : 0.0;
  const double bp = hyp_len < ref_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
  return 100.0 * bp * std::exp(log_sum / orders);
}

struct EntityCounts {
  std::size_t tp = 0, fp = 0, fn = 0;

  double f1() const {
    const double denom = 2.0 * double(tp) + double(fp) + double(fn);
    return denom == 0 ? 1.0 : 2.0 * double(tp) / denom;
  }
};

/// Micro F1 over entity mentions with multiset matching per response.
inline EntityCounts entity_counts(const Responses& pred, const Responses& gold,
                                  const std::set<std::string>& entities) {
  if (pred.size() != gold.size()) throw ArgumentError("prediction/gold count mismatch");
  EntityCounts c;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    std::map<std::string, std::size_t> g, p;
    for (const auto& tok : gold[i]) {
      if (entities.count(tok)) ++g[tok];
    }
    for (const auto& tok : pred[i]) {
      if (entities.count(tok)) ++p[tok];
    }
    std::size_t np = 0, ng = 0, tp = 0;
    for (const auto& [tok, n] : p) {
      np += n;
      if (auto it = g.find(tok); it != g.end()) tp += std::min(n, it->second);
    }
    for (const auto& [tok, n] : g) ng += n;
    c.tp += tp;
    c.fp += np - tp;
    c.fn += ng - tp;
  }
  return c;
}

inline double entity_f1(const Responses& pred, const Responses& gold,
                        const std::set<std::string>& entities) {
  return entity_counts(pred, gold, entities).f1();
}

struct EvalReport {
  double per_response_acc = 0;
  double per_dialog_acc = 0;
  double bleu = 0;
  double entity_f1 = 0;
  std::size_t responses = 0;
  std::size_t dialogs = 0;
  EntityCounts entities;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["per_response_acc"] = per_response_acc;
    j["per_dialog_acc"] = per_dialog_acc;
    j["bleu"] = bleu;
    j["entity_f1"] = entity_f1;
    j["counts"] = {{"responses", responses},
                   {"dialogs", dialogs},
                   {"entity_tp", entities.tp},
                   {"entity_fp", entities.fp},
                   {"entity_fn", entities.fn}};
    return j;
  }
};

inline EvalReport make_report(const Responses& pred, const Responses& gold,
                              const std::vector<std::size_t>& dialog_sizes,
                              const std::set<std::string>& entities) {
  EvalReport r;
  r.responses = gold.size();
  r.dialogs = dialog_sizes.size();
  r.per_response_acc = per_response_accuracy(pred, gold);
  r.per_dialog_acc = per_dialog_accuracy(pred, gold, dialog_sizes);
  r.bleu = gold.empty() ? 0.0 : bleu(pred, gold);
  r.entities = entity_counts(pred, gold, entities);
  r.entity_f1 = r.entities.f1();
  return r;
}

}  // namespace bossnet

#endif  // BOSSNET_METRICS_HPP_
