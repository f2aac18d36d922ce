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

// Losses, disentangle label dropout, Adam, the training loop, corpus
// evaluation and finite-difference gradient checking.
//
// The disentangle loss is binary cross-entropy pulling the gate toward
// 1 - D_l:  L_d = -sum_t [D_l log(1 - g) + (1 - D_l) log g].

#ifndef BOSSNET_TRAINING_HPP_
#define BOSSNET_TRAINING_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bossnet/common.hpp"
#include "bossnet/config.hpp"
#include "bossnet/corpus.hpp"
#include "bossnet/ka_perturb.hpp"
#include "bossnet/metrics.hpp"
#include "bossnet/model.hpp"
#include "bossnet/vocabulary.hpp"
#include "json.hpp"

namespace bossnet {

// ---------------------------------------------------------------- losses

/// Per-step quantities entering L_ce: the gate and the probabilities each
/// path assigns to the gold token.
struct StepScore {
  double gate = 1.0;
  double pg = 0.0;
  double pc = 0.0;
};

inline double response_loss(const std::vector<StepScore>& steps, const TokenList& gold) {
  if (steps.size() != gold.size()) throw ArgumentError("steps and gold response differ in length");
  double loss = 0;
  for (const StepScore& s : steps) {
    const double p = s.gate * s.pg + (1.0 - s.gate) * s.pc;
    loss -= std::log(std::max(p, kProbabilityFloor));
  }
  return loss;
}

inline double disentangle_loss(const std::vector<double>& gates,
                               const std::vector<std::uint8_t>& labels) {
  if (gates.size() != labels.size()) throw ArgumentError("gates and labels differ in length");
  double loss = 0;
  for (std::size_t t = 0; t < gates.size(); ++t) {
    const double g = labels[t] ? 1.0 - gates[t] : gates[t];
    loss -= std::log(std::max(g, kProbabilityFloor));
  }
  return loss;
}

inline double total_loss(double response, double disentangle, double gamma) {
  if (gamma < 0) throw ArgumentError("gamma must be >= 0");
  return response + gamma * disentangle;
}

/// Teacher-forced step scores of the model on one instance.
template <typename T>
std::vector<StepScore> step_scores(const BossNet<T>& model, const ContextInstance& inst) {
  const auto steps = model.teacher_forced_steps(inst);
  const auto e = model.encode_context(inst, false);
  std::vector<StepScore> out;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const StepTarget tg =
        step_target(inst.gold_response[t], e.memory.support, model.vocab(), model.decode_vocab());
    StepScore s;
    s.gate = double(steps[t].gate);
    s.pg = tg.decode >= 0 ? double(steps[t].pg(tg.decode)) : 0.0;
    s.pc = tg.copy >= 0 ? double(steps[t].copy.pc(tg.copy)) : 0.0;
    out.push_back(s);
  }
  return out;
}

// ------------------------------------------------------------------- DLD

/// Non-indicator tokens of the KB cells in an instance's memory.
inline std::unordered_set<std::string> kb_members(const ContextInstance& inst) {
  std::unordered_set<std::string> out;
  for (const MemoryCell& cell : inst.memory) {
    if (cell.kind != CellKind::kKbTuple) continue;
    for (const std::string& tok : cell.tokens) {
      if (!is_indicator(tok)) out.insert(tok);
    }
  }
  return out;
}

/// Embeds each KB-member token of the memory and the query as UNK with
/// probability `rate`. Surfaces and the gold response are untouched.
template <typename Rng>
ContextInstance apply_dld(const ContextInstance& inst, double rate, Rng& rng) {
  if (rate < 0 || rate > 1) throw ArgumentError("dld rate must be in [0, 1]");
  ContextInstance out = inst;
  if (rate == 0) return out;
  const auto members = kb_members(inst);
  std::bernoulli_distribution drop(rate);
  auto mask_cell = [&](MemoryCell& cell) {
    cell.unk_mask.assign(cell.tokens.size(), 0);
    for (std::size_t j = 0; j < cell.tokens.size(); ++j) {
      if (members.count(cell.tokens[j]) && drop(rng)) cell.unk_mask[j] = 1;
    }
  };
  for (MemoryCell& cell : out.memory) mask_cell(cell);
  mask_cell(out.query);
  return out;
}

// ------------------------------------------------------------- optimizer

/// Flat (pointer, length) views of every tensor, in visit order.
template <typename T>
std::vector<std::pair<T*, std::size_t>> flat_views(Parameters<T>& p) {
  std::vector<std::pair<T*, std::size_t>> out;
  p.visit([&](const std::string&, auto& m) {
    out.emplace_back(m.data(), static_cast<std::size_t>(m.size()));
  });
  return out;
}

/// Clamps every component to [-clip, clip].
template <typename T>
void clip_values(Parameters<T>& grad, double clip) {
  for (auto [ptr, n] : flat_views(grad)) {
    for (std::size_t i = 0; i < n; ++i) ptr[i] = std::clamp(ptr[i], T(-clip), T(clip));
  }
}

template <typename T>
bool all_finite(Parameters<T>& p) {
  for (auto [ptr, n] : flat_views(p)) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(double(ptr[i]))) return false;
    }
  }
  return true;
}

template <typename T>
class Adam {
 public:
  Adam(const Parameters<T>& like, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(like), v_(like) {
    m_.set_zero();
    v_.set_zero();
  }

  void step(Parameters<T>& params, Parameters<T>& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, t_);
    const double c2 = 1.0 - std::pow(beta2_, t_);
    auto p = flat_views(params), g = flat_views(grad), m = flat_views(m_), v = flat_views(v_);
    for (std::size_t k = 0; k < p.size(); ++k) {
      for (std::size_t i = 0; i < p[k].second; ++i) {
        const double gi = double(g[k].first[i]);
        const double mi = beta1_ * double(m[k].first[i]) + (1 - beta1_) * gi;
        const double vi = beta2_ * double(v[k].first[i]) + (1 - beta2_) * gi * gi;
        m[k].first[i] = T(mi);
        v[k].first[i] = T(vi);
        p[k].first[i] -= T(lr_ * (mi / c1) / (std::sqrt(vi / c2) + eps_));
      }
    }
  }

  int steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  Parameters<T> m_, v_;
};

// ------------------------------------------------------------ evaluation

struct Evaluation {
  Responses pred;
  Responses gold;
  std::vector<std::size_t> dialog_sizes;
  EvalReport report;
};

/// Greedy-decodes every context of `corpus` and scores it.
template <typename T>
Evaluation evaluate(const BossNet<T>& model, const Corpus& corpus, int max_len = 30) {
  Evaluation ev;
  for (std::size_t d = 0; d < corpus.dialogs.size(); ++d) {
    const Dialog& dialog = corpus.dialogs[d];
    if (dialog.turns.empty()) continue;
    ev.dialog_sizes.push_back(dialog.turns.size());
    for (std::size_t k = 1; k <= dialog.turns.size(); ++k) {
      const ContextInstance inst = build_context(dialog, k);
      ev.pred.push_back(model.greedy_decode(inst, max_len).tokens);
      ev.gold.push_back(dialog.turns[k - 1].system);
    }
  }
  ev.report = make_report(ev.pred, ev.gold, ev.dialog_sizes, collect_entities(corpus));
  return ev;
}

/// Mean gate over teacher-forced gold tokens, split by disentangle label.
struct GateStats {
  double mean_kb = 0, mean_other = 0;
  std::size_t kb = 0, other = 0;
};

template <typename T>
GateStats gate_statistics(const BossNet<T>& model, const std::vector<ContextInstance>& instances) {
  GateStats s;
  double sum_kb = 0, sum_other = 0;
  for (const ContextInstance& inst : instances) {
    const auto steps = model.teacher_forced_steps(inst);
    for (std::size_t t = 0; t < steps.size(); ++t) {
      if (inst.disentangle_labels[t]) {
        sum_kb += double(steps[t].gate);
        ++s.kb;
      } else {
        sum_other += double(steps[t].gate);
        ++s.other;
      }
    }
  }
  s.mean_kb = s.kb ? sum_kb / double(s.kb) : 0.0;
  s.mean_other = s.other ? sum_other / double(s.other) : 0.0;
  return s;
}

// -------------------------------------------------------------- training

struct EpochRecord {
  int epoch = 0;
  double loss = 0, response = 0, disentangle = 0;
  double dev_metric = 0;
  EvalReport dev;
  bool has_dev = false;
  double seconds = 0;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["epoch"] = epoch;
    j["loss"] = loss;
    j["response_loss"] = response;
    j["disentangle_loss"] = disentangle;
    if (has_dev) {
      j["dev_metric"] = dev_metric;
      j["dev"] = dev.to_json();
    }
    j["seconds"] = seconds;
    return j;
  }
};

template <typename T>
struct TrainResult {
  BossNet<T> best;
  int best_epoch = 0;  // 0 = initial parameters
  double best_dev = -1;
  std::vector<double> dev_history;
  std::vector<EpochRecord> history;
};

/// Called after every epoch with the current model; returning false stops
/// training.
template <typename T>
using EpochCallback = std::function<bool(const EpochRecord&, const BossNet<T>&)>;

inline double dev_score(const EvalReport& r, const std::string& metric) {
  return metric == "bleu" ? r.bleu : r.per_response_acc;
}

/// Minibatch Adam with per-value clipping, DLD, per-epoch dev evaluation,
/// best-dev retention and early stopping. Without a dev corpus the final
/// parameters are kept.
template <typename T>
TrainResult<T> train(const Corpus& train_corpus, const Corpus* dev_corpus, const TrainConfig& cfg,
                     const EpochCallback<T>& on_epoch = {}) {
  cfg.validate();
  const std::vector<ContextInstance> instances = build_contexts(train_corpus);
  if (instances.empty()) throw ArgumentError("training corpus has no contexts");
  const std::string metric = cfg.dev_metric == "auto" ? "accuracy" : cfg.dev_metric;

  BossNet<T> model(build_vocabulary(train_corpus, cfg.include_kb_vocab), cfg.embed_dim, cfg.hops);
  model.initialize(cfg.seed);
  TrainResult<T> result;
  result.best = model;

  Adam<T> adam(model.params(), cfg.learning_rate);
  Parameters<T> grad(model.params());
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(instances.size());
  std::iota(order.begin(), order.end(), 0);
  int since_best = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t b = 0; b < order.size(); b += std::size_t(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), b + std::size_t(cfg.batch_size));
      const double weight = 1.0 / double(end - b);
      grad.set_zero();
      for (std::size_t k = b; k < end; ++k) {
        const ContextInstance inst = apply_dld(instances[order[k]], cfg.dld_rate, rng);
        const LossBreakdown l = model.loss(inst, cfg.gamma, &grad, weight);
        if (!std::isfinite(l.total)) {
          throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) +
                                ", dialog " + std::to_string(inst.dialog_index) + ", turn " +
                                std::to_string(inst.turn_index));
        }
        rec.loss += l.total;
        rec.response += l.response;
        rec.disentangle += l.disentangle;
      }
      if (!all_finite(grad)) {
        throw DivergenceError("non-finite gradient at epoch " + std::to_string(epoch));
      }
      clip_values(grad, cfg.clip_value);
      adam.step(model.params(), grad);
    }
    const double n = double(instances.size());
    rec.loss /= n;
    rec.response /= n;
    rec.disentangle /= n;

    bool improved = false;
    if (dev_corpus) {
      rec.dev = evaluate(model, *dev_corpus, cfg.max_len).report;
      rec.has_dev = true;
      rec.dev_metric = dev_score(rec.dev, metric);
      result.dev_history.push_back(rec.dev_metric);
      improved = rec.dev_metric > result.best_dev;
    } else {
      improved = true;
    }
    if (improved) {
      result.best = model;
      result.best_epoch = epoch;
      if (dev_corpus) result.best_dev = rec.dev_metric;
      since_best = 0;
    } else {
      ++since_best;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(rec);
    if (on_epoch && !on_epoch(rec, model)) break;
    if (dev_corpus && since_best >= cfg.patience) break;
  }
  return result;
}

// ------------------------------------------------------- gradient checks

/// Central-difference gradient of f at x.
template <typename F>
std::vector<double> numeric_gradient(F&& f, std::vector<double> x, double eps = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + eps;
    const double up = f(x);
    x[i] = keep - eps;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2 * eps);
  }
  return g;
}

inline double relative_error(double analytic, double numeric, double floor = 1e-5) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct GradCheckResult {
  double max_rel_error = 0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

/// Compares the analytic gradient of the total loss with central
/// differences for every parameter (PAD embedding excluded: it is frozen).
inline GradCheckResult grad_check(const BossNet<double>& model, const ContextInstance& inst,
                                  double gamma, double eps = 1e-5) {
  BossNet<double> work = model;
  Parameters<double> grad(work.params());
  grad.set_zero();
  work.loss(inst, gamma, &grad);
  auto g = flat_views(grad);
  auto p = flat_views(work.params());
  std::vector<std::string> names;
  work.params().visit([&](const std::string& name, const auto&) { names.push_back(name); });
  const std::size_t pad_rows = static_cast<std::size_t>(work.dims().embed_dim);

  GradCheckResult r;
  for (std::size_t k = 0; k < p.size(); ++k) {
    for (std::size_t i = 0; i < p[k].second; ++i) {
      if (k == 0 && i < pad_rows) continue;  // PAD column
      double& theta = p[k].first[i];
      const double keep = theta;
      theta = keep + eps;
      const double up = work.loss(inst, gamma).total;
      theta = keep - eps;
      const double down = work.loss(inst, gamma).total;
      theta = keep;
      const double err = relative_error(g[k].first[i], (up - down) / (2 * eps));
      ++r.checked;
      if (err > r.max_rel_error) {
        r.max_rel_error = err;
        r.worst_tensor = names[k];
        r.worst_index = i;
      }
    }
  }
  return r;
}

}  // namespace bossnet

#endif  // BOSSNET_TRAINING_HPP_
