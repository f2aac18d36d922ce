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

// Knowledge-adaptability test sets: a seeded fraction of KB entities is
// renamed to novel surfaces everywhere they occur.

#ifndef BOSSNET_KA_PERTURB_HPP_
#define BOSSNET_KA_PERTURB_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>

#include "bossnet/common.hpp"
#include "bossnet/corpus.hpp"
#include "json.hpp"

namespace bossnet {

struct KaManifest {
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> mapping;  // original -> replacement

  nlohmann::json to_json() const {
    return {{"fraction", fraction}, {"seed", seed}, {"mapping", mapping}};
  }
  static KaManifest from_json(const nlohmann::json& j) {
    KaManifest m;
    m.fraction = j.at("fraction").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.mapping = j.at("mapping").get<std::map<std::string, std::string>>();
    return m;
  }
};

/// Surfaces appearing as the subject or object of any KB triple.
inline std::set<std::string> collect_entities(const Corpus& corpus) {
  std::set<std::string> out;
  for (const Dialog& d : corpus.dialogs) {
    for (const Triple& t : d.kb) {
      out.insert(t.subject);
      out.insert(t.object);
    }
  }
  return out;
}

inline std::set<std::string> corpus_tokens(const Corpus& corpus) {
  std::set<std::string> out;
  for (const Dialog& d : corpus.dialogs) {
    for (const Turn& t : d.turns) {
      out.insert(t.user.begin(), t.user.end());
      out.insert(t.system.begin(), t.system.end());
    }
    for (const Triple& f : d.kb) out.insert({f.subject, f.predicate, f.object});
  }
  return out;
}

/// Whole-token substitution over utterances and KB subjects/objects.
inline Corpus rename_tokens(Corpus corpus, const std::map<std::string, std::string>& mapping) {
  auto apply = [&](std::string& tok) {
    if (auto it = mapping.find(tok); it != mapping.end()) tok = it->second;
  };
  for (Dialog& d : corpus.dialogs) {
    for (Turn& t : d.turns) {
      std::for_each(t.user.begin(), t.user.end(), apply);
      std::for_each(t.system.begin(), t.system.end(), apply);
    }
    for (Triple& f : d.kb) {
      apply(f.subject);
      apply(f.object);
    }
  }
  return corpus;
}

inline std::map<std::string, std::string> invert(const std::map<std::string, std::string>& m) {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : m) out.emplace(v, k);
  return out;
}

/// Number of entities selected for `fraction` of `n`, rounded half up.
inline std::size_t ka_selection_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5 + 1e-9));
}

/// Renames round(fraction * |entities|) corpus-globally chosen entities to
/// "<surface>_ka<counter>", skipping any candidate already present in the
/// corpus.
inline std::pair<Corpus, KaManifest> perturb(const Corpus& corpus, double fraction,
                                             std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ArgumentError("fraction must be in [0, 1]");
  }
  const std::set<std::string> entities = collect_entities(corpus);
  std::vector<std::string> pool(entities.begin(), entities.end());
  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::min(pool.size(), ka_selection_count(fraction, pool.size())));
  std::sort(pool.begin(), pool.end());

  const std::set<std::string> taken = corpus_tokens(corpus);
  KaManifest manifest{fraction, seed, {}};
  std::size_t counter = 0;
  for (const std::string& entity : pool) {
    std::string replacement;
    do {
      replacement = entity + "_ka" + std::to_string(counter++);
    } while (taken.count(replacement));
    manifest.mapping.emplace(entity, std::move(replacement));
  }
  return {rename_tokens(corpus, manifest.mapping), std::move(manifest)};
}

}  // namespace bossnet

#endif  // BOSSNET_KA_PERTURB_HPP_
