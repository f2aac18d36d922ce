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

#ifndef BOSSNET_COMMON_HPP_
#define BOSSNET_COMMON_HPP_

#include <cctype>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace bossnet {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using TokenList = std::vector<std::string>;

// Reserved vocabulary entries, always at ids 0..3.
inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kGoToken = "<go>";
inline constexpr std::string_view kEosToken = "<eos>";
inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kGoId = 2;
inline constexpr int kEosId = 3;

inline constexpr std::string_view kUserSpeaker = "$u";
inline constexpr std::string_view kSystemSpeaker = "$s";
inline constexpr std::string_view kKbSpeaker = "$db";

/// Raised on malformed corpus or config input. `line()` is 0 when the
/// location is not a line (e.g. a JSON dialog index).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BoundsError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Temporal ("#3") and speaker ("$u", "$s", "$db") suffix tokens.
inline bool is_indicator(std::string_view token) {
  if (token == kUserSpeaker || token == kSystemSpeaker || token == kKbSpeaker) {
    return true;
  }
  if (token.size() < 2 || token.front() != '#') return false;
  for (std::size_t i = 1; i < token.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(token[i]))) return false;
  }
  return true;
}

inline std::string temporal_token(int index) { return "#" + std::to_string(index); }

/// Lower-cases and splits on whitespace.
inline TokenList tokenize(std::string_view text) {
  TokenList out;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

inline std::string join(const TokenList& tokens, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

}  // namespace bossnet

#endif  // BOSSNET_COMMON_HPP_
