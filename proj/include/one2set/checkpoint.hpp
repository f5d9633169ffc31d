// Copyright 2026 The One2Set Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Checkpoint layout, all integers little-endian:
//
//   "ONE2SET\0"            8-byte magic
//   u32 version            currently 1
//   u32 scalar_bytes       4 (float32) or 8 (float64)
//   u64 vocab_hash         Vocabulary::hash() of the training vocabulary
//   u32 n + n bytes        model configuration echo, `key=value` lines
//   u32 block_count
//   block_count x { u32 n + n bytes name, u64 rows, u64 cols,
//                   rows*cols IEEE-754 scalars, row-major }
//
// Blocks appear in parameter-creation order.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "one2set/config.hpp"
#include "one2set/model.hpp"

namespace one2set {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr char kCheckpointMagic[8] = {'O', 'N', 'E', '2', 'S', 'E', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace checkpoint_detail {

template <typename U>
void put(std::ostream& os, U v) {
  static_assert(std::is_unsigned_v<U>);
  unsigned char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(buf), sizeof(U));
}

template <typename U>
U get(std::istream& is) {
  static_assert(std::is_unsigned_v<U>);
  unsigned char buf[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(U))) throw CheckpointError("checkpoint truncated");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return v;
}

inline void put_string(std::ostream& os, const std::string& s) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& is, std::size_t limit = 1 << 20) {
  const auto n = get<std::uint32_t>(is);
  if (n > limit) throw CheckpointError("checkpoint string too long");
  std::string s(n, '\0');
  if (!is.read(s.data(), n)) throw CheckpointError("checkpoint truncated");
  return s;
}

inline void put_scalar(std::ostream& os, double v, std::uint32_t bytes) {
  if (bytes == 4) {
    put<std::uint32_t>(os, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  } else {
    put<std::uint64_t>(os, std::bit_cast<std::uint64_t>(v));
  }
}

inline double get_scalar(std::istream& is, std::uint32_t bytes) {
  if (bytes == 4) return static_cast<double>(std::bit_cast<float>(get<std::uint32_t>(is)));
  return std::bit_cast<double>(get<std::uint64_t>(is));
}

}  // namespace checkpoint_detail

inline std::string model_config_text(const ModelConfig& m) {
  std::ostringstream os;
  os << "layers=" << m.layers << '\n'
     << "heads=" << m.heads << '\n'
     << "model_dim=" << m.model_dim << '\n'
     << "ff_dim=" << m.ff_dim << '\n'
     << "embed_dim=" << m.embed_dim << '\n'
     << "vocab_size=" << m.vocab_size << '\n'
     << "num_codes=" << m.num_codes << '\n'
     << "max_phrase_len=" << m.max_phrase_len << '\n'
     << "max_source_len=" << m.max_source_len << '\n'
     << "dropout=" << m.dropout << '\n'
     << "use_codes=" << (m.use_codes ? "true" : "false") << '\n'
     << "one2seq=" << (m.one2seq ? "true" : "false") << '\n';
  return os.str();
}

inline ModelConfig parse_model_config(const std::string& text) {
  ModelConfig m;
  config_detail::Binder b;
  b.uint("layers", m.layers)
      .uint("heads", m.heads)
      .uint("model_dim", m.model_dim)
      .uint("ff_dim", m.ff_dim)
      .uint("embed_dim", m.embed_dim)
      .uint("vocab_size", m.vocab_size)
      .uint("num_codes", m.num_codes)
      .uint("max_phrase_len", m.max_phrase_len)
      .uint("max_source_len", m.max_source_len)
      .real("dropout", m.dropout)
      .flag("use_codes", m.use_codes)
      .flag("one2seq", m.one2seq);
  b.apply(KeyValueConfig::parse_string(text));
  m.validate();
  return m;
}

template <typename T>
void save_checkpoint(std::ostream& os, const SetTransModel<T>& model, std::uint64_t vocab_hash) {
  using namespace checkpoint_detail;
  const std::uint32_t bytes = sizeof(T);
  os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put<std::uint32_t>(os, kCheckpointVersion);
  put<std::uint32_t>(os, bytes);
  put<std::uint64_t>(os, vocab_hash);
  put_string(os, model_config_text(model.config()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(model.params().size()));
  for (const auto& p : model.params()) {
    put_string(os, p.name);
    put<std::uint64_t>(os, p.value.rows());
    put<std::uint64_t>(os, p.value.cols());
    for (T v : p.value.storage()) put_scalar(os, static_cast<double>(v), bytes);
  }
  if (!os) throw CheckpointError("failed writing checkpoint");
}

template <typename T>
void save_checkpoint(const std::string& path, const SetTransModel<T>& model, std::uint64_t vocab_hash) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CheckpointError("cannot write checkpoint: " + path);
  save_checkpoint(os, model, vocab_hash);
}

template <typename T>
struct LoadedCheckpoint {
  SetTransModel<T> model;
  std::uint64_t vocab_hash = 0;
};

// Rebuilds the model from the configuration echo and fills every parameter,
// rejecting unknown, missing or mis-shaped blocks.
template <typename T>
LoadedCheckpoint<T> load_checkpoint(std::istream& is) {
  using namespace checkpoint_detail;
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw CheckpointError("not a one2set checkpoint");
  }
  const auto version = get<std::uint32_t>(is);
  if (version != kCheckpointVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  const auto bytes = get<std::uint32_t>(is);
  if (bytes != 4 && bytes != 8) throw CheckpointError("unsupported scalar width");
  const auto hash = get<std::uint64_t>(is);
  const ModelConfig cfg = parse_model_config(get_string(is));
  LoadedCheckpoint<T> out{SetTransModel<T>(cfg, 0), hash};
  auto& params = out.model.params();
  const auto blocks = get<std::uint32_t>(is);
  if (blocks != params.size()) throw CheckpointError("checkpoint parameter count does not match its configuration");
  std::vector<bool> seen(params.size(), false);
  for (std::uint32_t b = 0; b < blocks; ++b) {
    const std::string name = get_string(is);
    Parameter<T>* p = params.find(name);
    if (!p) throw CheckpointError("unknown parameter block '" + name + "'");
    const auto rows = get<std::uint64_t>(is);
    const auto cols = get<std::uint64_t>(is);
    if (rows != p->value.rows() || cols != p->value.cols()) {
      throw CheckpointError("shape mismatch for '" + name + "'");
    }
    for (auto& v : p->value.storage()) v = static_cast<T>(get_scalar(is, bytes));
    seen[static_cast<std::size_t>(p - &params[0])] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw CheckpointError("missing parameter block '" + params[i].name + "'");
  return out;
}

template <typename T>
LoadedCheckpoint<T> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot read checkpoint: " + path);
  return load_checkpoint<T>(is);
}

// FNV-1a over the serialized bytes; used for reproducibility checks.
template <typename T>
std::uint64_t parameter_hash(const SetTransModel<T>& model) {
  std::ostringstream os;
  save_checkpoint(os, model, 0);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : os.str()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace one2set
