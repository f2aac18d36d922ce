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

// Dialog corpora: the bAbI dialog text format, a JSON carrier for
// CamRest/SMD-style data, and the per-turn context instances fed to the
// model.

#ifndef BOSSNET_CORPUS_HPP_
#define BOSSNET_CORPUS_HPP_

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "bossnet/common.hpp"
#include "json.hpp"

namespace bossnet {

struct Triple {
  std::string subject;
  std::string predicate;
  std::string object;

  bool operator==(const Triple&) const = default;
};

struct Turn {
  TokenList user;
  TokenList system;

  bool operator==(const Turn&) const = default;
};

struct Dialog {
  std::vector<Turn> turns;
  std::vector<Triple> kb;
  // kb_anchor[i] = number of turns that precede fact i in the source. It
  // positions the fact on re-serialization and sets its temporal indicator.
  std::vector<std::size_t> kb_anchor;

  bool operator==(const Dialog&) const = default;
};

enum class Split { kTrain, kDev, kTest, kKa };

struct Corpus {
  std::string name;
  Split split = Split::kTrain;
  std::vector<Dialog> dialogs;

  bool operator==(const Corpus&) const = default;
};

enum class CellKind { kUserUtterance, kSystemUtterance, kKbTuple };

struct MemoryCell {
  TokenList tokens;
  CellKind kind = CellKind::kUserUtterance;
  int temporal_index = 1;
  // Positions embedded as UNK (dropout); the surface in `tokens` is kept for
  // copy matching and emission. Empty means nothing is masked.
  std::vector<std::uint8_t> unk_mask;

  std::size_t size() const { return tokens.size(); }
  bool masked(std::size_t j) const { return j < unk_mask.size() && unk_mask[j]; }
};

struct ContextInstance {
  std::vector<MemoryCell> memory;
  MemoryCell query;
  TokenList gold_response;  // ends with <eos>
  std::vector<std::uint8_t> disentangle_labels;
  std::size_t dialog_index = 0;
  std::size_t turn_index = 1;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

}  // namespace detail

/// Parses bAbI dialog text. Turn lines are "N user\tsystem", KB lines are
/// "N subject predicate object"; dialogs are separated by blank lines and N
/// counts from 1 within each dialog.
inline Corpus parse_babi_text(std::string_view text, std::string name = "babi",
                              Split split = Split::kTrain) {
  Corpus corpus{std::move(name), split, {}};
  Dialog current;
  std::size_t expected = 1;
  bool open = false;

  auto close = [&] {
    if (open) corpus.dialogs.push_back(std::move(current));
    current = Dialog{};
    expected = 1;
    open = false;
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (detail::blank(line)) {
      close();
      if (end == text.size()) break;
      continue;
    }

    std::size_t space = line.find(' ');
    if (space == std::string_view::npos || space == 0) {
      throw ParseError(line_no, "expected '<number> <content>'");
    }
    std::size_t number = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + space, number);
    if (ec != std::errc{} || ptr != line.data() + space) {
      throw ParseError(line_no, "line number is not an integer");
    }
    if (number != expected) {
      throw ParseError(line_no, "expected line number " + std::to_string(expected) +
                                    ", got " + std::to_string(number));
    }
    ++expected;
    open = true;

    std::string_view content = line.substr(space + 1);
    const auto tabs = std::count(content.begin(), content.end(), '\t');
    if (tabs == 1) {
      const std::size_t tab = content.find('\t');
      Turn turn{tokenize(content.substr(0, tab)), tokenize(content.substr(tab + 1))};
      if (turn.user.empty() || turn.system.empty()) {
        throw ParseError(line_no, "turn has an empty user or system side");
      }
      current.turns.push_back(std::move(turn));
    } else if (tabs == 0) {
      TokenList fact = tokenize(content);
      if (fact.size() != 3) {
        throw ParseError(line_no, "KB fact must have subject, predicate and object");
      }
      current.kb.push_back({fact[0], fact[1], fact[2]});
      current.kb_anchor.push_back(current.turns.size());
    } else {
      throw ParseError(line_no, "expected at most one tab, found " + std::to_string(tabs));
    }
    if (end == text.size()) break;
  }
  close();
  return corpus;
}

inline Corpus parse_babi(const std::string& path, Split split = Split::kTrain) {
  return parse_babi_text(detail::read_file(path), path, split);
}

/// Canonical bAbI serialization: KB facts are placed before the turn whose
/// index equals their anchor; every dialog is followed by a blank line.
inline std::string write_babi(const Corpus& corpus) {
  std::string out;
  for (const Dialog& dialog : corpus.dialogs) {
    std::size_t n = 1;
    std::size_t fact = 0;
    auto emit_facts = [&](std::size_t anchor) {
      for (; fact < dialog.kb.size() &&
             (fact >= dialog.kb_anchor.size() ? 0 : dialog.kb_anchor[fact]) <= anchor;
           ++fact) {
        const Triple& t = dialog.kb[fact];
        out += std::to_string(n++) + " " + t.subject + " " + t.predicate + " " + t.object + "\n";
      }
    };
    for (std::size_t k = 0; k < dialog.turns.size(); ++k) {
      emit_facts(k);
      out += std::to_string(n++) + " " + join(dialog.turns[k].user) + "\t" +
             join(dialog.turns[k].system) + "\n";
    }
    emit_facts(static_cast<std::size_t>(-1));
    out += "\n";
  }
  return out;
}

/// JSON corpus: [{"turns":[{"user":str,"system":str}...], "kb":[[s,p,o]...]}].
inline Corpus parse_json_corpus_text(std::string_view text, std::string name = "json",
                                     Split split = Split::kTrain) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError(0, "top level must be an array of dialogs");

  Corpus corpus{std::move(name), split, {}};
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto fail = [i](const std::string& what) {
      throw ParseError(0, "dialog " + std::to_string(i) + ": " + what);
    };
    const auto& d = doc[i];
    if (!d.is_object()) fail("not an object");
    for (const auto& [key, _] : d.items()) {
      if (key != "turns" && key != "kb") fail("unknown key '" + key + "'");
    }
    if (!d.contains("turns") || !d["turns"].is_array()) fail("missing 'turns' array");
    Dialog dialog;
    for (const auto& t : d["turns"]) {
      if (!t.is_object() || !t.contains("user") || !t.contains("system") ||
          !t["user"].is_string() || !t["system"].is_string() || t.size() != 2) {
        fail("turn must be {\"user\": string, \"system\": string}");
      }
      Turn turn{tokenize(t["user"].get<std::string>()), tokenize(t["system"].get<std::string>())};
      if (turn.user.empty() || turn.system.empty()) fail("turn has an empty side");
      dialog.turns.push_back(std::move(turn));
    }
    if (d.contains("kb")) {
      if (!d["kb"].is_array()) fail("'kb' must be an array");
      for (const auto& f : d["kb"]) {
        if (!f.is_array() || f.size() != 3) fail("KB entry must be [subject, predicate, object]");
        Triple triple;
        std::string* slots[] = {&triple.subject, &triple.predicate, &triple.object};
        for (std::size_t k = 0; k < 3; ++k) {
          if (!f[k].is_string()) fail("KB entry fields must be strings");
          TokenList tok = tokenize(f[k].get<std::string>());
          if (tok.size() != 1) fail("KB field must be a single token");
          *slots[k] = tok[0];
        }
        dialog.kb.push_back(std::move(triple));
        dialog.kb_anchor.push_back(0);
      }
    }
    corpus.dialogs.push_back(std::move(dialog));
  }
  return corpus;
}

inline Corpus parse_json_corpus(const std::string& path, Split split = Split::kTrain) {
  return parse_json_corpus_text(detail::read_file(path), path, split);
}

inline std::string write_json_corpus(const Corpus& corpus) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const Dialog& dialog : corpus.dialogs) {
    nlohmann::ordered_json d;
    d["turns"] = nlohmann::ordered_json::array();
    for (const Turn& t : dialog.turns) {
      d["turns"].push_back({{"user", join(t.user)}, {"system", join(t.system)}});
    }
    d["kb"] = nlohmann::ordered_json::array();
    for (const Triple& f : dialog.kb) d["kb"].push_back({f.subject, f.predicate, f.object});
    doc.push_back(std::move(d));
  }
  return doc.dump(1) + "\n";
}

enum class CorpusFormat { kBabi, kJson };

inline CorpusFormat format_from_path(const std::string& path) {
  return path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0 ? CorpusFormat::kJson
                                                                            : CorpusFormat::kBabi;
}

inline Corpus load_corpus(const std::string& path, CorpusFormat format,
                          Split split = Split::kTrain) {
  return format == CorpusFormat::kJson ? parse_json_corpus(path, split)
                                       : parse_babi(path, split);
}

inline std::string write_corpus(const Corpus& corpus, CorpusFormat format) {
  return format == CorpusFormat::kJson ? write_json_corpus(corpus) : write_babi(corpus);
}

inline MemoryCell utterance_cell(const TokenList& words, CellKind kind, int turn) {
  MemoryCell cell;
  cell.tokens = words;
  cell.tokens.push_back(temporal_token(turn));
  cell.tokens.emplace_back(kind == CellKind::kUserUtterance ? kUserSpeaker : kSystemSpeaker);
  cell.kind = kind;
  cell.temporal_index = turn;
  return cell;
}

inline MemoryCell kb_cell(const Triple& fact, int temporal_index) {
  MemoryCell cell;
  cell.tokens = {fact.subject, fact.predicate, fact.object, temporal_token(temporal_index),
                 std::string(kKbSpeaker)};
  cell.kind = CellKind::kKbTuple;
  cell.temporal_index = temporal_index;
  return cell;
}

/// label[t] = 1 iff gold token t occurs (as a non-indicator token) in any KB
/// cell of `memory`.
inline std::vector<std::uint8_t> disentangle_labels(const TokenList& gold_response,
                                                    const std::vector<MemoryCell>& memory) {
  std::unordered_set<std::string_view> kb_words;
  for (const MemoryCell& cell : memory) {
    if (cell.kind != CellKind::kKbTuple) continue;
    for (const std::string& tok : cell.tokens) {
      if (!is_indicator(tok)) kb_words.insert(tok);
    }
  }
  std::vector<std::uint8_t> labels(gold_response.size(), 0);
  for (std::size_t t = 0; t < gold_response.size(); ++t) {
    labels[t] = kb_words.count(gold_response[t]) ? 1 : 0;
  }
  return labels;
}

/// KB cells for a dialog, in source order.
inline std::vector<MemoryCell> kb_cells(const Dialog& dialog) {
  std::vector<MemoryCell> cells;
  cells.reserve(dialog.kb.size());
  for (std::size_t i = 0; i < dialog.kb.size(); ++i) {
    const std::size_t anchor = i < dialog.kb_anchor.size() ? dialog.kb_anchor[i] : 0;
    cells.push_back(kb_cell(dialog.kb[i], static_cast<int>(anchor) + 1));
  }
  return cells;
}

/// Context for predicting the system response of turn `turn_index`
/// (1-based): prior utterances, then KB cells; the current user utterance is
/// the query only.
inline ContextInstance build_context(const Dialog& dialog, std::size_t turn_index) {
  if (turn_index < 1 || turn_index > dialog.turns.size()) {
    throw BoundsError("turn index " + std::to_string(turn_index) + " outside [1, " +
                      std::to_string(dialog.turns.size()) + "]");
  }
  ContextInstance instance;
  instance.turn_index = turn_index;
  for (std::size_t k = 1; k < turn_index; ++k) {
    const Turn& turn = dialog.turns[k - 1];
    instance.memory.push_back(utterance_cell(turn.user, CellKind::kUserUtterance, int(k)));
    instance.memory.push_back(utterance_cell(turn.system, CellKind::kSystemUtterance, int(k)));
  }
  for (MemoryCell& cell : kb_cells(dialog)) instance.memory.push_back(std::move(cell));
  const Turn& current = dialog.turns[turn_index - 1];
  instance.query = utterance_cell(current.user, CellKind::kUserUtterance, int(turn_index));
  instance.gold_response = current.system;
  instance.gold_response.emplace_back(kEosToken);
  instance.disentangle_labels = disentangle_labels(instance.gold_response, instance.memory);
  return instance;
}

/// Every (dialog, turn) context of a corpus, dialog-major.
inline std::vector<ContextInstance> build_contexts(const Corpus& corpus) {
  std::vector<ContextInstance> out;
  for (std::size_t d = 0; d < corpus.dialogs.size(); ++d) {
    for (std::size_t k = 1; k <= corpus.dialogs[d].turns.size(); ++k) {
      out.push_back(build_context(corpus.dialogs[d], k));
      out.back().dialog_index = d;
    }
  }
  return out;
}

}  // namespace bossnet

#endif  // BOSSNET_CORPUS_HPP_
