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

// Training and run configuration. Config files are flat `key = value`
// lines (a TOML subset): strings quoted, numbers and true/false bare, `#`
// starts a comment.

#ifndef BOSSNET_CONFIG_HPP_
#define BOSSNET_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "bossnet/common.hpp"
#include "json.hpp"

namespace bossnet {

struct TrainConfig {
  double learning_rate = 0.001;
  int hops = 1;
  int embed_dim = 128;
  double gamma = 1.0;
  double dld_rate = 0.2;
  double clip_value = 40.0;
  int batch_size = 32;
  int epochs = 100;
  std::uint64_t seed = 1;
  int patience = 10;
  int max_len = 30;
  bool include_kb_vocab = true;
  std::string dev_metric = "auto";  // auto | accuracy | bleu

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw ArgumentError(what);
    };
    require(learning_rate > 0, "learning_rate must be positive");
    require(hops >= 1, "hops must be >= 1");
    require(embed_dim >= 1, "embed_dim must be >= 1");
    require(gamma >= 0 && gamma <= 1.5, "gamma must be in [0, 1.5]");
    require(dld_rate >= 0 && dld_rate <= 1, "dld_rate must be in [0, 1]");
    require(clip_value > 0, "clip_value must be positive");
    require(batch_size >= 1, "batch_size must be >= 1");
    require(epochs >= 0, "epochs must be >= 0");
    require(patience >= 1, "patience must be >= 1");
    require(max_len >= 1, "max_len must be >= 1");
    require(dev_metric == "auto" || dev_metric == "accuracy" || dev_metric == "bleu",
            "dev_metric must be auto, accuracy or bleu");
  }
};

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"learning_rate", c.learning_rate}, {"hops", c.hops},
       {"embed_dim", c.embed_dim},         {"gamma", c.gamma},
       {"dld_rate", c.dld_rate},           {"clip_value", c.clip_value},
       {"batch_size", c.batch_size},       {"epochs", c.epochs},
       {"seed", c.seed},                   {"patience", c.patience},
       {"max_len", c.max_len},             {"include_kb_vocab", c.include_kb_vocab},
       {"dev_metric", c.dev_metric}};
}

inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.learning_rate = j.at("learning_rate");
  c.hops = j.at("hops");
  c.embed_dim = j.at("embed_dim");
  c.gamma = j.at("gamma");
  c.dld_rate = j.at("dld_rate");
  c.clip_value = j.at("clip_value");
  c.batch_size = j.at("batch_size");
  c.epochs = j.at("epochs");
  c.seed = j.at("seed");
  c.patience = j.at("patience");
  c.max_len = j.at("max_len");
  c.include_kb_vocab = j.at("include_kb_vocab");
  c.dev_metric = j.at("dev_metric");
}

struct RunConfig {
  TrainConfig train;
  std::string train_path;
  std::string dev_path;
  std::string format = "auto";  // auto | babi | json
  std::string run_dir;
};

/// Raw `key = value` pairs; values keep their quotes stripped.
inline std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0, pos = 0;
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ParseError(line_no, "empty key or value");
    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') throw ParseError(line_no, "unterminated string");
      value = value.substr(1, value.size() - 2);
    }
    if (!out.emplace(key, std::string(value)).second) {
      throw ParseError(line_no, "duplicate key '" + key + "'");
    }
  }
  return out;
}

/// Applies one `key = value` setting; unknown keys are rejected.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto number = [&](auto& slot) {
    try {
      std::size_t used = 0;
      if constexpr (std::is_same_v<std::decay_t<decltype(slot)>, double>) {
        slot = std::stod(value, &used);
      } else if constexpr (std::is_same_v<std::decay_t<decltype(slot)>, std::uint64_t>) {
        slot = std::stoull(value, &used);
      } else {
        slot = std::stoi(value, &used);
      }
      if (used != value.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ArgumentError("invalid number for '" + key + "': " + value);
    }
  };
  TrainConfig& t = cfg.train;
  if (key == "learning_rate") number(t.learning_rate);
  else if (key == "hops") number(t.hops);
  else if (key == "embed_dim") number(t.embed_dim);
  else if (key == "gamma") number(t.gamma);
  else if (key == "dld_rate") number(t.dld_rate);
  else if (key == "clip_value") number(t.clip_value);
  else if (key == "batch_size") number(t.batch_size);
  else if (key == "epochs") number(t.epochs);
  else if (key == "seed") number(t.seed);
  else if (key == "patience") number(t.patience);
  else if (key == "max_len") number(t.max_len);
  else if (key == "include_kb_vocab") {
    if (value != "true" && value != "false") throw ArgumentError("include_kb_vocab must be true/false");
    t.include_kb_vocab = value == "true";
  } else if (key == "dev_metric") t.dev_metric = value;
  else if (key == "train_path") cfg.train_path = value;
  else if (key == "dev_path") cfg.dev_path = value;
  else if (key == "format") cfg.format = value;
  else if (key == "run_dir") cfg.run_dir = value;
  else throw ArgumentError("unknown config key '" + key + "'");
}

inline RunConfig parse_run_config(std::string_view text) {
  RunConfig cfg;
  for (const auto& [key, value] : parse_key_values(text)) apply_setting(cfg, key, value);
  return cfg;
}

inline void validate(const RunConfig& cfg) {
  cfg.train.validate();
  if (cfg.train_path.empty()) throw ArgumentError("train_path is required");
  if (cfg.run_dir.empty()) throw ArgumentError("run_dir is required");
  if (cfg.format != "auto" && cfg.format != "babi" && cfg.format != "json") {
    throw ArgumentError("format must be auto, babi or json");
  }
}

inline std::string format_run_config(const RunConfig& cfg) {
  const TrainConfig& t = cfg.train;
  std::string out;
  auto kv = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  auto str = [](const std::string& s) { return "\"" + s + "\""; };
  auto num = [](double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
  };
  kv("train_path", str(cfg.train_path));
  kv("dev_path", str(cfg.dev_path));
  kv("format", str(cfg.format));
  kv("run_dir", str(cfg.run_dir));
  kv("learning_rate", num(t.learning_rate));
  kv("hops", std::to_string(t.hops));
  kv("embed_dim", std::to_string(t.embed_dim));
  kv("gamma", num(t.gamma));
  kv("dld_rate", num(t.dld_rate));
  kv("clip_value", num(t.clip_value));
  kv("batch_size", std::to_string(t.batch_size));
  kv("epochs", std::to_string(t.epochs));
  kv("seed", std::to_string(t.seed));
  kv("patience", std::to_string(t.patience));
  kv("max_len", std::to_string(t.max_len));
  kv("include_kb_vocab", t.include_kb_vocab ? "true" : "false");
  kv("dev_metric", str(t.dev_metric));
  return out;
}

}  // namespace bossnet

#endif  // BOSSNET_CONFIG_HPP_
