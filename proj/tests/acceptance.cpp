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

// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "bossnet/bossnet.hpp"

namespace {

using namespace bossnet;
using Clock = std::chrono::steady_clock;

// ---- pinned thresholds and scale --------------------------------------
constexpr double kT1MinAccuracy = 0.99;
constexpr double kKaMaxSpread = 0.02;
constexpr double kT5MaxGap = 0.10;
constexpr double kDistributionTol = 1e-6;
constexpr double kGradTol = 1e-4;
constexpr double kOracleTol = 1e-6;
constexpr double kGateKbMax = 0.1;
constexpr double kGateOtherMin = 0.9;
constexpr double kOverfitSeconds = 60.0;
constexpr int kOverfitMaxEpochs = 300;

constexpr std::size_t kT1TrainDialogs = 1000;
constexpr std::size_t kT1DevDialogs = 100;
constexpr std::size_t kT1TestDialogs = 500;
constexpr int kT1Epochs = 30;
constexpr std::size_t kT5TrainDialogs = 300;
constexpr std::size_t kT5DevDialogs = 40;
constexpr std::size_t kT5TestDialogs = 100;
constexpr int kT5Epochs = 20;
constexpr int kT5EmbedDim = 128;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << detail
            << std::endl;
  failures += !pass;
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream ss;
  ss.precision(prec);
  ss << std::fixed << v;
  return ss.str();
}

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

void log(const std::string& msg) { std::cerr << "  .. " << msg << std::endl; }

TrainResult<float> train_logged(const char* tag, const Corpus& train_set, const Corpus& dev,
                                const TrainConfig& cfg) {
  return train<float>(train_set, &dev, cfg, [&](const EpochRecord& r, const BossNet<float>&) {
    log(std::string(tag) + " epoch " + std::to_string(r.epoch) + " loss " + fmt(r.loss) +
        " dev " + fmt(r.dev_metric) + " (" + fmt(r.seconds, 1) + " s)");
    return r.dev_metric < 1.0;
  });
}

// ---- criteria 1, 2, 7: Task 1 ------------------------------------------
void task1() {
  const auto start = Clock::now();
  const Corpus train_set = synth_babi({1, kT1TrainDialogs, 101, false});
  const Corpus dev = synth_babi({1, kT1DevDialogs, 102, false});
  const Corpus test = synth_babi({1, kT1TestDialogs, 103, false});
  const Corpus oov = synth_babi({1, kT1TestDialogs, 104, true});

  TrainConfig cfg;  // T1 row: lr 0.001, K=1, d=128, gamma 1.0, DLD 0.2
  cfg.epochs = kT1Epochs;
  cfg.patience = 8;
  const TrainResult<float> r = train_logged("t1", train_set, dev, cfg);
  const double train_minutes = seconds_since(start) / 60;

  const Evaluation et = evaluate(r.best, test);
  const Evaluation eo = evaluate(r.best, oov);
  const double acc = et.report.per_response_acc, acc_oov = eo.report.per_response_acc;
  report(1, "Task 1 test and OOV per-response accuracy >= 0.99",
         acc >= kT1MinAccuracy && acc_oov >= kT1MinAccuracy,
         "test " + fmt(acc) + ", oov " + fmt(acc_oov) + ", per-dialog " +
             fmt(et.report.per_dialog_acc) + "/" + fmt(eo.report.per_dialog_acc) + " (best epoch " +
             std::to_string(r.best_epoch) + ", " + fmt(train_minutes, 1) + " min)");

  double lo = 1, hi = 0;
  std::string sweep;
  for (int pct = 0; pct <= 100; pct += 10) {
    const auto ka = perturb(test, pct / 100.0, 7).first;
    const double a = evaluate(r.best, ka).report.per_response_acc;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
    sweep += (pct ? " " : "") + fmt(a, 3);
  }
  report(2, "Task 1 KA sweep 0-100% spread <= 2 points", hi - lo <= kKaMaxSpread + 1e-12,
         "spread " + fmt(100 * (hi - lo), 2) + " points [" + sweep + "]");

  const GateStats g = gate_statistics(r.best, build_contexts(test));
  report(7, "gate means: D_l=1 < 0.1, D_l=0 > 0.9",
         g.kb > 0 && g.mean_kb < kGateKbMax && g.mean_other > kGateOtherMin,
         "D_l=1 " + fmt(g.mean_kb, 6) + " over " + std::to_string(g.kb) + " tokens, D_l=0 " +
             fmt(g.mean_other, 6) + " over " + std::to_string(g.other));
}

// ---- criterion 3: Task 5 -----------------------------------------------
void task5() {
  const auto start = Clock::now();
  const Corpus train_set = synth_babi({5, kT5TrainDialogs, 201, false});
  const Corpus dev = synth_babi({5, kT5DevDialogs, 202, false});
  const Corpus test = synth_babi({5, kT5TestDialogs, 203, false});
  const Corpus oov = synth_babi({5, kT5TestDialogs, 204, true});

  TrainConfig cfg;  // T5 row with a reduced embedding size
  cfg.learning_rate = 0.0005;
  cfg.hops = 3;
  cfg.embed_dim = kT5EmbedDim;
  cfg.epochs = kT5Epochs;
  cfg.patience = 5;
  const TrainResult<float> r = train_logged("t5", train_set, dev, cfg);
  const double a = evaluate(r.best, test).report.per_response_acc;
  const double o = evaluate(r.best, oov).report.per_response_acc;
  report(3, "Task 5 OOV accuracy within 10 points of test", a - o <= kT5MaxGap,
         "test " + fmt(a) + ", oov " + fmt(o) + ", gap " + fmt(100 * (a - o), 2) +
             " points (best epoch " + std::to_string(r.best_epoch) + ", " +
             fmt(seconds_since(start) / 60, 1) + " min)");
}

// ---- criterion 4: invariant suites --------------------------------------
Corpus random_corpus(std::mt19937_64& rng, int dialogs) {
  static const std::vector<std::string> words = {"hi", "the", "book", "what", "is", "ok", "for"};
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  Corpus c;
  for (int d = 0; d < dialogs; ++d) {
    Dialog dialog;
    std::vector<std::string> ents;
    for (int f = uni(0, 3); f > 0; --f) {
      dialog.kb.push_back({"e" + std::to_string(uni(0, 9)), "r_x", "v" + std::to_string(uni(0, 9))});
      ents.push_back(dialog.kb.back().subject);
      ents.push_back(dialog.kb.back().object);
    }
    auto utter = [&] {
      TokenList u;
      for (int k = uni(1, 5); k > 0; --k) {
        u.push_back(!ents.empty() && uni(0, 2) == 0 ? ents[std::size_t(uni(0, int(ents.size()) - 1))]
                                                    : words[std::size_t(uni(0, int(words.size()) - 1))]);
      }
      return u;
    };
    const int turns = uni(1, 4);
    for (int t = 0; t < turns; ++t) dialog.turns.push_back({utter(), utter()});
    for (std::size_t f = 0; f < dialog.kb.size(); ++f) dialog.kb_anchor.push_back(std::size_t(uni(0, turns)));
    std::sort(dialog.kb_anchor.begin(), dialog.kb_anchor.end());
    c.dialogs.push_back(std::move(dialog));
  }
  return c;
}

void invariants() {
  std::mt19937_64 rng(401);
  double worst_norm = 0;
  bool ka_ok = true, dld_ok = true, pd_ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    const Corpus c = random_corpus(rng, 4);
    BossNet<double> model(build_vocabulary(c, true), 4, 2);
    model.params().initialize(rng(), 0.5);

    // Distribution normalizations along a greedy decode.
    for (const auto& inst : build_contexts(c)) {
      std::vector<DecoderStep<double>> trace;
      DecoderMemory<double> mem;
      model.greedy_decode(inst, 4, &trace, &mem);
      for (const auto& st : trace) {
        worst_norm = std::max(worst_norm, std::abs(st.pg.sum() - 1));
        if (!mem.empty()) {
          worst_norm = std::max({worst_norm, std::abs(st.copy.alpha.sum() - 1),
                                 std::abs(st.copy.beta.sum() - 1), std::abs(st.copy.pc.sum() - 1)});
        }
      }
      for (const auto& h : model.encode_context(inst, true).hops) {
        if (h.p.size()) worst_norm = std::max(worst_norm, std::abs(h.p.sum() - 1));
      }
    }

    // KA round trip.
    const double f = std::uniform_int_distribution<int>(0, 10)(rng) / 10.0;
    const auto [out, manifest] = perturb(c, f, rng());
    ka_ok = ka_ok && rename_tokens(out, invert(manifest.mapping)) == c &&
            manifest.mapping.size() == ka_selection_count(f, collect_entities(c).size());

    // DLD keeps surfaces, gold, and the copy support.
    for (const auto& inst : build_contexts(c)) {
      const ContextInstance m = apply_dld(inst, 0.5, rng);
      bool same = m.gold_response == inst.gold_response && m.query.tokens == inst.query.tokens &&
                  m.memory.size() == inst.memory.size();
      for (std::size_t i = 0; same && i < m.memory.size(); ++i) {
        same = m.memory[i].tokens == inst.memory[i].tokens;
      }
      DecoderMemory<double> a, b;
      model.greedy_decode(inst, 1, nullptr, &a);
      model.greedy_decode(m, 1, nullptr, &b);
      dld_ok = dld_ok && same && a.support.surfaces == b.support.surfaces;
    }

    // per_dialog <= per_response on equal-size partitions.
    const std::size_t dialogs = std::size_t(1 + trial % 6), size = std::size_t(1 + trial % 4);
    Responses gold(dialogs * size), pred;
    for (auto& r : gold) r = {std::to_string(rng() % 3)};
    pred = gold;
    for (auto& r : pred) {
      if (rng() % 3 == 0) r = {"x"};
    }
    pd_ok = pd_ok && per_dialog_accuracy(pred, gold, std::vector<std::size_t>(dialogs, size)) <=
                         per_response_accuracy(pred, gold) + 1e-12;
  }
  report(4, "invariant suites (normalization, per_dialog <= per_response, KA round trip, DLD)",
         worst_norm <= kDistributionTol && ka_ok && dld_ok && pd_ok,
         "max normalization error " + std::to_string(worst_norm) + ", KA round trip " +
             (ka_ok ? "ok" : "broken") + ", DLD surfaces " + (dld_ok ? "ok" : "broken") +
             ", per_dialog bound " + (pd_ok ? "ok" : "broken"));
}

// ---- criterion 5: gradients ----------------------------------------------
void gradients() {
  std::mt19937_64 rng(501);
  const Corpus c = random_corpus(rng, 30);
  const auto instances = build_contexts(c);
  BossNet<double> model(build_vocabulary(c, true), 4, 2);
  model.params().initialize(502, 0.5);
  double worst = 0;
  std::string where;
  for (int k = 0; k < 20; ++k) {
    const auto& inst = instances[std::size_t(rng() % instances.size())];
    const ContextInstance masked = apply_dld(inst, 0.3, rng);
    const GradCheckResult r = grad_check(model, masked, k % 2 ? 1.0 : 0.5);
    if (r.max_rel_error > worst) {
      worst = r.max_rel_error;
      where = r.worst_tensor + "[" + std::to_string(r.worst_index) + "]";
    }
  }
  report(5, "grad_check at d=4 on 20 instances < 1e-4", worst < kGradTol,
         "max relative error " + std::to_string(worst) + (where.empty() ? "" : " at " + where));
}

// ---- criterion 6: copy-attention oracle ------------------------------------
void oracle() {
  std::mt19937_64 rng(601);
  const std::vector<std::string> pool = {"a", "b", "c", "d", "zz"};
  const Vocabulary vocab({"a", "b", "c", "d"});
  const DecodeVocabulary dv(vocab);
  std::normal_distribution<double> normal(0, 1.5);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int h = 1 + int(rng() % 6), n = 1 + int(rng() % 5);
    std::vector<MemoryCell> cells{static_cast<std::size_t>(n)};
    MemoryEncoding<double> enc;
    enc.psi.resize(h, n);
    for (int i = 0; i < n; ++i) {
      const int len = 1 + int(rng() % 5);
      for (int j = 0; j < len; ++j) cells[std::size_t(i)].tokens.push_back(pool[rng() % pool.size()]);
      Mat<double> phi(h, len);
      for (auto& v : phi.reshaped()) v = normal(rng);
      enc.phi.push_back(phi);
      for (int r = 0; r < h; ++r) enc.psi(r, i) = normal(rng);
    }
    Vec<double> s(h);
    for (auto& v : s) v = normal(rng);
    const auto mem = make_decoder_memory<double>(enc, cells, vocab, dv);
    const auto cd = copy_dist<double>(s, mem);

    // Per-position oracle with explicit exponentials.
    double za = 0;
    std::vector<double> ea(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) za += ea[std::size_t(i)] = std::exp(s.dot(enc.psi.col(i)));
    std::map<std::string, double> pc;
    int pos = 0;
    for (int i = 0; i < n; ++i) {
      double zt = 0;
      for (Eigen::Index j = 0; j < enc.phi[std::size_t(i)].cols(); ++j) zt += std::exp(s.dot(enc.phi[std::size_t(i)].col(j)));
      for (Eigen::Index j = 0; j < enc.phi[std::size_t(i)].cols(); ++j, ++pos) {
        const double b = ea[std::size_t(i)] / za * std::exp(s.dot(enc.phi[std::size_t(i)].col(j))) / zt;
        worst = std::max(worst, std::abs(cd.beta(pos) - b));
        pc[cells[std::size_t(i)].tokens[std::size_t(j)]] += b;
      }
    }
    for (const auto& [w, p] : pc) worst = std::max(worst, std::abs(cd.pc(mem.support.find(w)) - p));
  }

  // Constructed duplicates: token softmax 0.3 / 0.5 / 0.2 with "a" twice.
  std::vector<MemoryCell> cells(1);
  cells[0].tokens = {"a", "b", "a"};
  MemoryEncoding<double> enc;
  enc.psi = Mat<double>::Zero(1, 1);
  enc.phi.push_back(Mat<double>(1, 3));
  enc.phi[0] << std::log(0.3), std::log(0.5), std::log(0.2);
  const auto mem = make_decoder_memory<double>(enc, cells, vocab, dv);
  const auto cd = copy_dist<double>(Vec<double>::Ones(1), mem);
  const double dup = cd.pc(mem.support.find("a"));
  report(6, "two-level copy attention vs brute-force oracle (1e-6) and duplicate summation",
         worst <= kOracleTol && std::abs(dup - 0.5) <= kOracleTol,
         "max deviation " + std::to_string(worst) + " over 100 memories, P_c(dup) " + fmt(dup, 6));
}

// ---- criterion 8: metrics ------------------------------------------------
void metrics() {
  std::mt19937_64 rng(801);
  bool ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    const Corpus c = random_corpus(rng, 1 + int(rng() % 6));
    const auto ents = collect_entities(c);
    Responses gold, pred;
    std::vector<std::size_t> sizes;
    for (const auto& d : c.dialogs) {
      sizes.push_back(d.turns.size());
      for (const auto& t : d.turns) {
        gold.push_back(t.system);
        pred.push_back(rng() % 3 ? t.system : t.user);
      }
    }
    ok = ok && std::abs(bleu(gold, gold) - 100) < 1e-9 && entity_f1(gold, gold, ents) == 1.0;

    // Consistent joint renaming of every entity.
    std::map<std::string, std::string> mapping;
    for (const auto& e : ents) mapping[e] = "renamed_" + e;
    auto rename = [&](Responses rs) {
      for (auto& r : rs) {
        for (auto& t : r) {
          if (auto it = mapping.find(t); it != mapping.end()) t = it->second;
        }
      }
      return rs;
    };
    std::set<std::string> renamed_ents;
    for (const auto& [from, to] : mapping) renamed_ents.insert(to);
    const EvalReport a = make_report(pred, gold, sizes, ents);
    const EvalReport b = make_report(rename(pred), rename(gold), sizes, renamed_ents);
    ok = ok && a.per_response_acc == b.per_response_acc && a.per_dialog_acc == b.per_dialog_acc &&
         std::abs(a.bleu - b.bleu) < 1e-9 && a.entity_f1 == b.entity_f1;
  }
  report(8, "metric self-tests on 50 random corpora", ok,
         ok ? "bleu(x,x)=100, entity_f1(x,x)=1, renaming invariant" : "a self-test failed");
}

// ---- criterion 9: overfit --------------------------------------------------
void overfit() {
  const auto start = Clock::now();
  const Corpus c = synth_babi({1, 5, 901, false});
  TrainConfig cfg;
  cfg.embed_dim = 64;
  cfg.learning_rate = 0.005;
  cfg.batch_size = 8;
  cfg.dld_rate = 0.0;
  cfg.epochs = kOverfitMaxEpochs;
  double acc = 0;
  int epochs = 0;
  train<float>(c, nullptr, cfg, [&](const EpochRecord& r, const BossNet<float>& m) {
    epochs = r.epoch;
    if (r.epoch % 5 != 0) return true;
    acc = evaluate(m, c).report.per_response_acc;
    return acc < 1.0;
  });
  const double secs = seconds_since(start);
  report(9, "overfit 5 dialogs to 100% within 300 epochs and 60 s",
         acc == 1.0 && epochs <= kOverfitMaxEpochs && secs < kOverfitSeconds,
         "train accuracy " + fmt(acc) + " after " + std::to_string(epochs) + " epochs, " +
             fmt(secs, 1) + " s");
}

}  // namespace

int main(int argc, char** argv) {
  // Optional criterion filter, e.g. `bossnet_acceptance 5 6 8`.
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto want = [&](std::initializer_list<int> ids) {
    if (only.empty()) return true;
    return std::any_of(ids.begin(), ids.end(), [&](int id) { return only.count(id) > 0; });
  };
  try {
    if (want({9})) overfit();
    if (want({6})) oracle();
    if (want({5})) gradients();
    if (want({8})) metrics();
    if (want({4})) invariants();
    if (want({1, 2, 7})) task1();
    if (want({3})) task5();
  } catch (const std::exception& e) {
    std::cout << "FAIL acceptance aborted: " << e.what() << std::endl;
    return 1;
  }
  std::cout << (failures ? "acceptance: " + std::to_string(failures) + " criteria failed"
                         : std::string("acceptance: all criteria passed"))
            << std::endl;
  return failures;
}
