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

// bossnet: train, evaluate, ka-gen, dump-attention, chat, gen-babi.
//
// Exit codes: 0 success, 2 bad input (arguments, config, corpus, checkpoint,
// selector), 3 training diverged, 4 write failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bossnet/bossnet.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace bossnet;

namespace {

constexpr int kExitBadInput = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitWrite = 4;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.flush();
  if (!out) throw IoError("cannot write " + path.string());
}

CorpusFormat resolve_format(const std::string& format, const std::string& path) {
  if (format == "babi") return CorpusFormat::kBabi;
  if (format == "json") return CorpusFormat::kJson;
  if (format != "auto") throw ArgumentError("format must be auto, babi or json");
  return format_from_path(path);
}

Corpus load(const std::string& path, const std::string& format, Split split) {
  if (!fs::exists(path)) throw ArgumentError("no such corpus: " + path);
  return load_corpus(path, resolve_format(format, path), split);
}

// ------------------------------------------------------------------ train

struct TrainArgs {
  std::string config;
  std::vector<std::string> sets;
  int epochs = -1;
  long long seed = -1;
  bool force = false;
  bool quiet = false;
};

int cmd_train(const TrainArgs& args) {
  RunConfig cfg = parse_run_config(detail::read_file(args.config));
  for (const std::string& kv : args.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ArgumentError("--set expects key=value, got " + kv);
    apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.epochs >= 0) cfg.train.epochs = args.epochs;
  if (args.seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(args.seed);
  validate(cfg);

  const Corpus train_corpus = load(cfg.train_path, cfg.format, Split::kTrain);
  if (train_corpus.dialogs.empty()) throw ArgumentError("training corpus is empty");
  Corpus dev_corpus;
  const bool has_dev = !cfg.dev_path.empty();
  if (has_dev) dev_corpus = load(cfg.dev_path, cfg.format, Split::kDev);
  if (cfg.train.dev_metric == "auto") {
    cfg.train.dev_metric =
        resolve_format(cfg.format, cfg.train_path) == CorpusFormat::kBabi ? "accuracy" : "bleu";
  }

  const fs::path run(cfg.run_dir);
  if (fs::exists(run) && !fs::is_empty(run) && !args.force) {
    throw ArgumentError("run directory " + run.string() + " is not empty (use --force)");
  }
  std::error_code ec;
  fs::create_directories(run, ec);
  if (ec) throw IoError("cannot create " + run.string() + ": " + ec.message());
  write_text(run / "config.snapshot", format_run_config(cfg));

  std::ofstream log(run / "log.jsonl", std::ios::trunc);
  if (!log) throw IoError("cannot write " + (run / "log.jsonl").string());
  auto on_epoch = [&](const EpochRecord& rec, const BossNet<float>&) {
    log << rec.to_json().dump() << "\n";
    log.flush();
    if (!args.quiet) {
      std::cerr << "epoch " << rec.epoch << " loss " << rec.loss;
      if (rec.has_dev) std::cerr << " dev " << rec.dev_metric;
      std::cerr << "\n";
    }
    return true;
  };
  TrainResult<float> result = train<float>(train_corpus, has_dev ? &dev_corpus : nullptr,
                                           cfg.train, on_epoch);
  if (!log) throw IoError("cannot write training log");

  Checkpoint<float> ck{result.best, cfg.train, result.best_epoch, result.dev_history};
  save_checkpoint((run / "checkpoint.best").string(), ck);
  const Evaluation ev = evaluate(result.best, has_dev ? dev_corpus : train_corpus, cfg.train.max_len);
  nlohmann::ordered_json report = ev.report.to_json();
  report["corpus"] = has_dev ? "dev" : "train";
  report["best_epoch"] = result.best_epoch;
  write_text(run / "report.json", report.dump(2) + "\n");
  return 0;
}

// --------------------------------------------------------------- evaluate

/// A corpus whose utterance words are all unknown to the checkpoint was not
/// produced for it.
void check_vocabulary(const Vocabulary& vocab, const Corpus& corpus) {
  std::size_t known = 0, total = 0;
  for (const Dialog& d : corpus.dialogs) {
    for (const Turn& t : d.turns) {
      for (const auto* side : {&t.user, &t.system}) {
        for (const std::string& tok : *side) {
          ++total;
          known += vocab.contains(tok);
        }
      }
    }
  }
  if (total > 0 && known == 0) {
    throw ArgumentError("vocabulary mismatch: no corpus word is known to the checkpoint");
  }
}

int cmd_evaluate(const std::string& checkpoint, const std::string& corpus_path,
                 const std::string& format, const std::string& dump, int max_len) {
  const Checkpoint<float> ck = load_checkpoint<float>(checkpoint);
  const Corpus corpus = load(corpus_path, format, Split::kTest);
  check_vocabulary(ck.model.vocab(), corpus);
  const Evaluation ev = evaluate(ck.model, corpus, max_len > 0 ? max_len : ck.config.max_len);
  if (!dump.empty()) {
    std::ostringstream out;
    std::size_t k = 0;
    for (std::size_t d = 0, di = 0; d < corpus.dialogs.size(); ++d) {
      if (corpus.dialogs[d].turns.empty()) continue;
      for (std::size_t t = 0; t < ev.dialog_sizes[di]; ++t, ++k) {
        out << d + 1 << "\t" << t + 1 << "\t" << (ev.pred[k] == ev.gold[k] ? "OK" : "DIFF")
            << "\t" << join(ev.pred[k]) << "\t" << join(ev.gold[k]) << "\n";
      }
      ++di;
    }
    write_text(dump, out.str());
  }
  std::cout << ev.report.to_json().dump(2) << "\n";
  return 0;
}

// ----------------------------------------------------------------- ka-gen

std::vector<double> parse_fractions(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) {
    for (int i = 0; i <= 10; ++i) out.push_back(i / 10.0);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ArgumentError("bad fraction '" + item + "'");
    }
  }
  return out;
}

int cmd_ka_gen(const std::string& corpus_path, const std::string& format,
               const std::string& fractions, std::uint64_t seed, const std::string& outdir,
               bool any_fraction) {
  const CorpusFormat fmt = resolve_format(format, corpus_path);
  const Corpus corpus = load_corpus(corpus_path, fmt, Split::kTest);
  const std::vector<double> fs_list = parse_fractions(fractions);
  for (double f : fs_list) {
    const double tenths = f * 10.0;
    if (!any_fraction && std::abs(tenths - std::round(tenths)) > 1e-9) {
      throw ArgumentError("fraction " + std::to_string(f) +
                          " is not a multiple of 0.1 (pass --any-fraction)");
    }
    if (f < 0 || f > 1) throw ArgumentError("fraction outside [0, 1]");
  }
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) throw IoError("cannot create " + outdir + ": " + ec.message());
  const std::string ext = fmt == CorpusFormat::kJson ? ".json" : ".txt";
  for (double f : fs_list) {
    auto [perturbed, manifest] = perturb(corpus, f, seed);
    const std::string stem = "ka_" + std::to_string(static_cast<int>(std::lround(f * 100)));
    write_text(fs::path(outdir) / (stem + ext), write_corpus(perturbed, fmt));
    write_text(fs::path(outdir) / (stem + ".manifest.json"), manifest.to_json().dump(1) + "\n");
  }
  return 0;
}

// --------------------------------------------------------- dump-attention

/// White-to-red heatmap: one block per memory position, alpha in the first
/// column, beta after a gap.
std::string heatmap_ppm(const CopyDistribution<float>& cd, const std::vector<int>& offsets) {
  const int block = 12;
  const int cells = static_cast<int>(offsets.size()) - 1;
  int width = 0;
  for (int i = 0; i < cells; ++i) width = std::max(width, offsets[i + 1] - offsets[i]);
  const int cols = width + 2;
  const int w = cols * block, h = std::max(cells, 1) * block;
  std::vector<unsigned char> px(std::size_t(w) * std::size_t(h) * 3, 255);
  auto paint = [&](int row, int col, double v) {
    v = std::clamp(v, 0.0, 1.0);
    const auto g = static_cast<unsigned char>(std::lround(255 * (1 - v)));
    for (int y = row * block; y < (row + 1) * block - 1; ++y) {
      for (int x = col * block; x < (col + 1) * block - 1; ++x) {
        unsigned char* p = &px[(std::size_t(y) * std::size_t(w) + std::size_t(x)) * 3];
        p[0] = 255;
        p[1] = g;
        p[2] = g;
      }
    }
  };
  for (int i = 0; i < cells; ++i) {
    paint(i, 0, cd.alpha(i));
    for (int j = 0; j < offsets[i + 1] - offsets[i]; ++j) paint(i, j + 2, cd.beta(offsets[i] + j));
  }
  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.append(reinterpret_cast<const char*>(px.data()), px.size());
  return out;
}

int cmd_dump_attention(const std::string& checkpoint, const std::string& corpus_path,
                       const std::string& format, std::size_t dialog, std::size_t turn,
                       const std::string& outdir) {
  const Checkpoint<float> ck = load_checkpoint<float>(checkpoint);
  const Corpus corpus = load(corpus_path, format, Split::kTest);
  if (dialog < 1 || dialog > corpus.dialogs.size()) {
    throw BoundsError("dialog " + std::to_string(dialog) + " outside [1, " +
                      std::to_string(corpus.dialogs.size()) + "]");
  }
  const ContextInstance inst = build_context(corpus.dialogs[dialog - 1], turn);
  std::vector<DecoderStep<float>> steps;
  DecoderMemory<float> memory;
  const DecodedResponse out = ck.model.greedy_decode(inst, ck.config.max_len, &steps, &memory);

  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) throw IoError("cannot create " + outdir + ": " + ec.message());
  nlohmann::ordered_json j;
  j["dialog"] = dialog;
  j["turn"] = turn;
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const MemoryCell& c : inst.memory) cells.push_back(c.tokens);
  j["memory"] = cells;
  j["query"] = inst.query.tokens;
  j["gold"] = inst.gold_response;
  TokenList emitted = out.tokens;
  if (steps.size() > emitted.size()) emitted.emplace_back(kEosToken);
  j["response"] = emitted;
  nlohmann::ordered_json js = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const CopyDistribution<float>& cd = steps[t].copy;
    nlohmann::ordered_json s;
    s["token"] = emitted[t];
    s["gate"] = steps[t].gate;
    s["alpha"] = std::vector<float>(cd.alpha.data(), cd.alpha.data() + cd.alpha.size());
    nlohmann::ordered_json beta = nlohmann::ordered_json::array();
    for (int i = 0; i < memory.cells(); ++i) {
      const int a = memory.offsets[i], len = memory.offsets[i + 1] - a;
      beta.push_back(std::vector<float>(cd.beta.data() + a, cd.beta.data() + a + len));
    }
    s["beta"] = beta;
    js.push_back(s);
    write_text(fs::path(outdir) / ("step_" + std::to_string(t + 1) + ".ppm"),
               heatmap_ppm(cd, memory.offsets));
  }
  j["steps"] = js;
  write_text(fs::path(outdir) / "attention.json", j.dump(1) + "\n");
  return 0;
}

// ------------------------------------------------------------------- chat

std::vector<Triple> read_kb(const std::string& path) {
  std::vector<Triple> kb;
  if (path.empty()) return kb;
  std::istringstream in(detail::read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    TokenList toks = tokenize(line);
    if (toks.empty()) continue;
    if (toks.size() == 4 && std::all_of(toks[0].begin(), toks[0].end(), ::isdigit)) {
      toks.erase(toks.begin());
    }
    if (toks.size() != 3) throw ParseError(line_no, "KB line needs subject predicate object");
    kb.push_back({toks[0], toks[1], toks[2]});
  }
  return kb;
}

int cmd_chat(const std::string& checkpoint, const std::string& kb_path) {
  const Checkpoint<float> ck = load_checkpoint<float>(checkpoint);
  Dialog dialog;
  dialog.kb = read_kb(kb_path);
  dialog.kb_anchor.assign(dialog.kb.size(), 0);
  std::string line;
  while (std::getline(std::cin, line)) {
    TokenList user = tokenize(line);
    if (user.empty()) continue;
    dialog.turns.push_back({user, {"<pending>"}});
    const ContextInstance inst = build_context(dialog, dialog.turns.size());
    const DecodedResponse out = ck.model.greedy_decode(inst, ck.config.max_len);
    dialog.turns.back().system = out.tokens.empty() ? TokenList{"<silence>"} : out.tokens;
    std::cout << join(out.tokens) << std::endl;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BossNet task-oriented dialog toolkit"};
  app.require_subcommand(1);

  TrainArgs targs;
  auto* train_cmd = app.add_subcommand("train", "Train a model from a config file");
  train_cmd->add_option("--config", targs.config, "Config file")->required();
  train_cmd->add_option("--set", targs.sets, "Override a config key (key=value)");
  train_cmd->add_option("--epochs", targs.epochs, "Override epochs");
  train_cmd->add_option("--seed", targs.seed, "Override seed");
  train_cmd->add_flag("--force", targs.force, "Reuse a non-empty run directory");
  train_cmd->add_flag("--quiet", targs.quiet, "No per-epoch progress on stderr");

  std::string checkpoint, corpus, format = "auto", dump, fractions, outdir, kb;
  int max_len = 0;
  std::uint64_t seed = 1;
  bool any_fraction = false;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a checkpoint on a corpus");
  eval_cmd->add_option("--checkpoint", checkpoint)->required();
  eval_cmd->add_option("--corpus", corpus)->required();
  eval_cmd->add_option("--format", format, "auto, babi or json");
  eval_cmd->add_option("--dump-responses", dump, "Write pred/gold pairs here");
  eval_cmd->add_option("--max-len", max_len, "Decode length limit");

  auto* ka_cmd = app.add_subcommand("ka-gen", "Write knowledge-adaptability test sets");
  ka_cmd->add_option("--corpus", corpus)->required();
  ka_cmd->add_option("--format", format, "auto, babi or json");
  ka_cmd->add_option("--fractions", fractions, "Comma list (default 0.0,0.1,...,1.0)");
  ka_cmd->add_option("--seed", seed);
  ka_cmd->add_option("--outdir", outdir)->required();
  ka_cmd->add_flag("--any-fraction", any_fraction, "Allow fractions off the 0.1 grid");

  std::size_t dialog = 1, turn = 1;
  auto* dump_cmd = app.add_subcommand("dump-attention", "Dump per-step attention and gates");
  dump_cmd->add_option("--checkpoint", checkpoint)->required();
  dump_cmd->add_option("--corpus", corpus)->required();
  dump_cmd->add_option("--format", format, "auto, babi or json");
  dump_cmd->add_option("--dialog", dialog, "1-based dialog index")->required();
  dump_cmd->add_option("--turn", turn, "1-based turn index")->required();
  dump_cmd->add_option("--out", outdir, "Output directory")->required();

  auto* chat_cmd = app.add_subcommand("chat", "Interactive generation from stdin");
  chat_cmd->add_option("--checkpoint", checkpoint)->required();
  chat_cmd->add_option("--kb", kb, "KB file, one 'subject predicate object' per line");

  SynthOptions synth;
  std::string out_path;
  auto* gen_cmd = app.add_subcommand("gen-babi", "Generate restaurant dialogs in bAbI layout");
  gen_cmd->add_option("--task", synth.task, "1 or 5");
  gen_cmd->add_option("--dialogs", synth.dialogs);
  gen_cmd->add_option("--seed", synth.seed);
  gen_cmd->add_flag("--oov", synth.oov, "Use the out-of-vocabulary value set");
  gen_cmd->add_option("--out", out_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadInput;
  }

  try {
    if (*train_cmd) return cmd_train(targs);
    if (*eval_cmd) return cmd_evaluate(checkpoint, corpus, format, dump, max_len);
    if (*ka_cmd) return cmd_ka_gen(corpus, format, fractions, seed, outdir, any_fraction);
    if (*dump_cmd) return cmd_dump_attention(checkpoint, corpus, format, dialog, turn, outdir);
    if (*chat_cmd) return cmd_chat(checkpoint, kb);
    if (*gen_cmd) {
      write_text(out_path, write_babi(synth_babi(synth)));
      return 0;
    }
  } catch (const DivergenceError& e) {
    std::cerr << "error: training diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitWrite;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitBadInput;
}
