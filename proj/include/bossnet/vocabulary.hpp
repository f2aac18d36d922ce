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

#ifndef BOSSNET_VOCABULARY_HPP_
#define BOSSNET_VOCABULARY_HPP_

#include <algorithm>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bossnet/common.hpp"
#include "bossnet/corpus.hpp"
#include "json.hpp"

namespace bossnet {

/// Token <-> id map. Ids 0..3 are PAD, UNK, GO, EOS.
class Vocabulary {
 public:
  Vocabulary() {
    for (auto tok : {kPadToken, kUnkToken, kGoToken, kEosToken}) add(std::string(tok));
  }

  explicit Vocabulary(const std::vector<std::string>& tokens) : Vocabulary() {
    for (const auto& tok : tokens) {
      if (!contains(tok)) add(tok);
    }
  }

  int add(const std::string& token) {
    auto [it, inserted] = index_.emplace(token, static_cast<int>(tokens_.size()));
    if (inserted) tokens_.push_back(token);
    return it->second;
  }

  int id(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kUnkId : it->second;
  }
  bool contains(std::string_view token) const { return index_.count(std::string(token)) > 0; }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  nlohmann::json to_json() const { return tokens_; }
  static Vocabulary from_json(const nlohmann::json& j) {
    auto tokens = j.get<std::vector<std::string>>();
    if (tokens.size() < 4 || tokens[kPadId] != kPadToken || tokens[kUnkId] != kUnkToken ||
        tokens[kGoId] != kGoToken || tokens[kEosId] != kEosToken) {
      throw ParseError(0, "vocabulary does not start with the reserved tokens");
    }
    Vocabulary v;
    for (std::size_t i = 4; i < tokens.size(); ++i) v.add(tokens[i]);
    if (v.size() != static_cast<int>(tokens.size())) throw ParseError(0, "duplicate vocabulary entry");
    return v;
  }

  bool operator==(const Vocabulary& o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

/// Vocabulary over utterance tokens, the indicator tokens the context layout
/// produces and, if `include_kb`, KB tokens. Order: frequency descending,
/// then lexicographic.
inline Vocabulary build_vocabulary(const Corpus& corpus, bool include_kb) {
  std::map<std::string, long> counts;
  for (const Dialog& dialog : corpus.dialogs) {
    for (std::size_t k = 0; k < dialog.turns.size(); ++k) {
      for (const auto& tok : dialog.turns[k].user) ++counts[tok];
      for (const auto& tok : dialog.turns[k].system) ++counts[tok];
      const std::string temporal = temporal_token(static_cast<int>(k) + 1);
      counts[temporal] += 2;
      ++counts[std::string(kUserSpeaker)];
      ++counts[std::string(kSystemSpeaker)];
    }
    for (const MemoryCell& cell : kb_cells(dialog)) {
      for (std::size_t j = 0; j < cell.tokens.size(); ++j) {
        if (j < 3 && !include_kb) continue;
        ++counts[cell.tokens[j]];
      }
    }
  }
  std::vector<std::pair<std::string, long>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary vocab;
  for (const auto& [tok, _] : ranked) vocab.add(tok);
  return vocab;
}

}  // namespace bossnet

#endif  // BOSSNET_VOCABULARY_HPP_
