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

// Checkpoint container, version 1:
//
//   bytes 0-7    magic "BOSSCKPT"
//   u32 LE       format version
//   u64 LE       header length N
//   N bytes      UTF-8 JSON header: dims, config, epoch, dev_history,
//                vocabulary, tensors [{name, rows, cols}]
//   payload      every tensor in header order, column-major float64 LE

#ifndef BOSSNET_CHECKPOINT_HPP_
#define BOSSNET_CHECKPOINT_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "bossnet/common.hpp"
#include "bossnet/config.hpp"
#include "bossnet/model.hpp"
#include "bossnet/vocabulary.hpp"
#include "json.hpp"

namespace bossnet {

inline constexpr char kCheckpointMagic[8] = {'B', 'O', 'S', 'S', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little endian");

template <typename T>
struct Checkpoint {
  BossNet<T> model;
  TrainConfig config;
  int epoch = 0;
  std::vector<double> dev_history;
};

template <typename T>
std::string serialize_checkpoint(const Checkpoint<T>& ck) {
  const ModelDims& dims = ck.model.dims();
  nlohmann::ordered_json header;
  header["dims"] = {{"embed_dim", dims.embed_dim},
                    {"vocab_size", dims.vocab_size},
                    {"hops", dims.hops},
                    {"decode_size", dims.decode_size}};
  header["config"] = nlohmann::json(ck.config);
  header["epoch"] = ck.epoch;
  header["dev_history"] = ck.dev_history;
  header["vocabulary"] = ck.model.vocab().to_json();
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  std::string payload;
  ck.model.params().visit([&](const std::string& name, const auto& m) {
    tensors.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double v = static_cast<double>(m.data()[i]);
      char bytes[8];
      std::memcpy(bytes, &v, 8);
      payload.append(bytes, 8);
    }
  });
  header["tensors"] = tensors;
  const std::string text = header.dump();

  std::string out(kCheckpointMagic, 8);
  auto put = [&](auto value) {
    char bytes[sizeof(value)];
    std::memcpy(bytes, &value, sizeof(value));
    out.append(bytes, sizeof(value));
  };
  put(kCheckpointVersion);
  put(static_cast<std::uint64_t>(text.size()));
  out += text;
  out += payload;
  return out;
}

namespace detail {

template <typename T>
Checkpoint<T> deserialize_checkpoint(const std::string& bytes) {
  std::size_t pos = 0;
  auto take = [&](std::size_t n) {
    if (pos + n > bytes.size()) throw ParseError(0, "truncated checkpoint");
    const char* p = bytes.data() + pos;
    pos += n;
    return p;
  };
  if (std::memcmp(take(8), kCheckpointMagic, 8) != 0) throw ParseError(0, "not a checkpoint file");
  std::uint32_t version;
  std::memcpy(&version, take(4), 4);
  if (version != kCheckpointVersion) {
    throw ParseError(0, "unsupported checkpoint version " + std::to_string(version));
  }
  std::uint64_t header_len;
  std::memcpy(&header_len, take(8), 8);
  if (header_len > bytes.size()) throw ParseError(0, "truncated checkpoint");
  const nlohmann::json header =
      nlohmann::json::parse(std::string(take(header_len), header_len), nullptr, false);
  if (header.is_discarded() || !header.is_object()) throw ParseError(0, "corrupt checkpoint header");

  Checkpoint<T> ck;
  ck.config = header.at("config").get<TrainConfig>();
  ck.epoch = header.at("epoch");
  ck.dev_history = header.at("dev_history").get<std::vector<double>>();
  const auto& dims = header.at("dims");
  ck.model = BossNet<T>(Vocabulary::from_json(header.at("vocabulary")), dims.at("embed_dim"),
                        dims.at("hops"));
  if (ck.model.dims().vocab_size != dims.at("vocab_size").get<int>() ||
      ck.model.dims().decode_size != dims.at("decode_size").get<int>()) {
    throw ParseError(0, "checkpoint dims disagree with its vocabulary");
  }
  const auto& tensors = header.at("tensors");
  std::size_t k = 0;
  ck.model.params().visit([&](const std::string& name, auto& m) {
    if (k >= tensors.size()) throw ParseError(0, "checkpoint is missing tensor " + name);
    const auto& t = tensors[k++];
    if (t.at("name") != name || t.at("rows").get<Eigen::Index>() != m.rows() ||
        t.at("cols").get<Eigen::Index>() != m.cols()) {
      throw ParseError(0, "checkpoint tensor mismatch at " + name);
    }
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      double v;
      std::memcpy(&v, take(8), 8);
      m.data()[i] = static_cast<T>(v);
    }
  });
  if (k != tensors.size() || pos != bytes.size()) throw ParseError(0, "trailing checkpoint data");
  return ck;
}

}  // namespace detail

template <typename T>
Checkpoint<T> deserialize_checkpoint(const std::string& bytes) {
  try {
    return detail::deserialize_checkpoint<T>(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("corrupt checkpoint header: ") + e.what());
  }
}

template <typename T>
void save_checkpoint(const std::string& path, const Checkpoint<T>& ck) {
  const std::string bytes = serialize_checkpoint(ck);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("cannot write checkpoint " + path);
}

template <typename T>
Checkpoint<T> load_checkpoint(const std::string& path) {
  return deserialize_checkpoint<T>(detail::read_file(path));
}

}  // namespace bossnet

#endif  // BOSSNET_CHECKPOINT_HPP_
