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

#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include "one2set/loss.hpp"
#include "one2set/model.hpp"
#include "one2set/optimizer.hpp"

namespace one2set {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat `key = value` text; '#' starts a comment, values may be quoted.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& is) {
    KeyValueConfig c;
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line)) {
      ++n;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty() || trimmed.front() == '[') continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(n) + ": expected key = value");
      std::string key = trim(trimmed.substr(0, eq));
      std::string value = trim(trimmed.substr(eq + 1));
      if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
        value = value.substr(1, value.size() - 2);
      }
      if (key.empty()) throw ConfigError("config line " + std::to_string(n) + ": empty key");
      c.values_[key] = value;
    }
    return c;
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config: " + path);
    return parse(is);
  }

  static KeyValueConfig parse_string(const std::string& text) {
    std::istringstream is(text);
    return parse(is);
  }

  bool has(const std::string& k) const { return values_.count(k) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }
  void set(const std::string& k, const std::string& v) { values_[k] = v; }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> values_;
};

namespace config_detail {

inline bool parse_bool(const std::string& k, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + k + "': expected a boolean, got '" + v + "'");
}

inline double parse_double(const std::string& k, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + k + "': expected a number, got '" + v + "'");
  }
}

inline std::uint64_t parse_uint(const std::string& k, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v.front() == '-') throw std::invalid_argument(v);
    const auto u = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + k + "': expected a non-negative integer, got '" + v + "'");
  }
}

// Applies known keys through setters; any unknown key is an error.
class Binder {
 public:
  Binder& str(const std::string& k, std::string& dst) {
    setters_[k] = [&dst](const std::string&, const std::string& v) { dst = v; };
    return *this;
  }
  Binder& real(const std::string& k, double& dst) {
    setters_[k] = [&dst](const std::string& key, const std::string& v) { dst = parse_double(key, v); };
    return *this;
  }
  template <typename U>
  Binder& uint(const std::string& k, U& dst) {
    setters_[k] = [&dst](const std::string& key, const std::string& v) {
      dst = static_cast<U>(parse_uint(key, v));
    };
    return *this;
  }
  Binder& flag(const std::string& k, bool& dst) {
    setters_[k] = [&dst](const std::string& key, const std::string& v) { dst = parse_bool(key, v); };
    return *this;
  }
  void apply(const KeyValueConfig& kv) const {
    for (const auto& [k, v] : kv.values()) {
      auto it = setters_.find(k);
      if (it == setters_.end()) throw ConfigError("unknown config key '" + k + "'");
      it->second(k, v);
    }
  }

 private:
  std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters_;
};

}  // namespace config_detail

struct Ablations {
  bool no_codes = false;
  bool fixed_assign = false;
  bool random_assign = false;
  bool student_forcing = false;
  bool single_set_loss = false;
  bool one2seq_baseline = false;

  int active() const {
    return int(no_codes) + int(fixed_assign) + int(random_assign) + int(student_forcing) +
           int(single_set_loss) + int(one2seq_baseline);
  }
};

struct TrainConfig {
  std::string train_path;
  std::string valid_path;
  std::string checkpoint_path = "one2set.ckpt";
  std::string vocab_path;  // defaults to <checkpoint>.vocab
  std::string log_path;    // training CSV; empty for none

  std::size_t vocab_cap = 50002;
  AdamConfig adam;
  std::size_t batch_size = 12;
  std::size_t max_steps = 1000;
  std::size_t eval_every = 0;  // validation cadence in steps; 0 = only at the end
  std::size_t patience = 0;    // evaluations without improvement before stopping; 0 = never
  std::uint64_t seed = 1;
  std::size_t threads = 0;     // 0 = ONE2SET_THREADS or hardware concurrency

  ModelConfig model;
  std::size_t assign_steps = 2;  // K
  LossConfig loss;
  Ablations ablations;
  bool title_separator = false;
  std::size_t one2seq_max_len = 40;

  TrainConfig() { model.num_codes = 20; }

  std::string resolved_vocab_path() const {
    return vocab_path.empty() ? checkpoint_path + ".vocab" : vocab_path;
  }

  void validate() const {
    if (ablations.active() > 1) throw ConfigError("at most one ablation switch may be active");
    if (assign_steps == 0) throw ConfigError("assign_steps (K) must be at least 1");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (model.num_codes % 2 != 0) throw ConfigError("num_codes must be even");
    if (adam.learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
    loss.validate();
  }

  static TrainConfig from(const KeyValueConfig& kv) {
    TrainConfig c;
    double lambda_pre = c.loss.lambda_pre, lambda_abs = c.loss.lambda_abs;
    config_detail::Binder b;
    b.str("train", c.train_path)
        .str("valid", c.valid_path)
        .str("checkpoint", c.checkpoint_path)
        .str("vocab", c.vocab_path)
        .str("log", c.log_path)
        .uint("vocab_cap", c.vocab_cap)
        .real("learning_rate", c.adam.learning_rate)
        .real("beta1", c.adam.beta1)
        .real("beta2", c.adam.beta2)
        .real("epsilon", c.adam.epsilon)
        .real("clip_norm", c.adam.clip_norm)
        .uint("batch_size", c.batch_size)
        .uint("max_steps", c.max_steps)
        .uint("eval_every", c.eval_every)
        .uint("patience", c.patience)
        .uint("seed", c.seed)
        .uint("threads", c.threads)
        .uint("layers", c.model.layers)
        .uint("heads", c.model.heads)
        .uint("model_dim", c.model.model_dim)
        .uint("embed_dim", c.model.embed_dim)
        .uint("ff_dim", c.model.ff_dim)
        .uint("num_codes", c.model.num_codes)
        .uint("max_phrase_len", c.model.max_phrase_len)
        .uint("max_source_len", c.model.max_source_len)
        .real("dropout", c.model.dropout)
        .uint("assign_steps", c.assign_steps)
        .real("lambda_pre", lambda_pre)
        .real("lambda_abs", lambda_abs)
        .flag("no_codes", c.ablations.no_codes)
        .flag("fixed_assign", c.ablations.fixed_assign)
        .flag("random_assign", c.ablations.random_assign)
        .flag("student_forcing", c.ablations.student_forcing)
        .flag("single_set_loss", c.ablations.single_set_loss)
        .flag("one2seq_baseline", c.ablations.one2seq_baseline)
        .flag("title_separator", c.title_separator)
        .uint("one2seq_max_len", c.one2seq_max_len);
    b.apply(kv);
    c.loss.lambda_pre = lambda_pre;
    c.loss.lambda_abs = lambda_abs;
    if (!kv.has("embed_dim")) c.model.embed_dim = c.model.model_dim;
    c.validate();
    return c;
  }

  static TrainConfig load(const std::string& path) { return from(KeyValueConfig::load(path)); }

  // The loss settings implied by the ablation switches.
  LossConfig effective_loss() const {
    LossConfig l = loss;
    if (ablations.single_set_loss) l.mode = SetLossMode::kSingle;
    if (ablations.student_forcing) l.forcing = Forcing::kStudent;
    return l;
  }

  AssignMode assign_mode() const {
    if (ablations.fixed_assign) return AssignMode::kFixed;
    if (ablations.random_assign) return AssignMode::kRandom;
    return AssignMode::kKStep;
  }

  // Model configuration with the ablation switches applied.
  ModelConfig effective_model(std::size_t vocab_size) const {
    ModelConfig m = model;
    m.vocab_size = vocab_size;
    if (ablations.no_codes || ablations.one2seq_baseline) m.use_codes = false;
    m.one2seq = ablations.one2seq_baseline;
    return m;
  }
};

// Worker count: explicit setting, else ONE2SET_THREADS, else hardware.
inline std::size_t resolve_threads(std::size_t requested) {
  std::size_t n = requested;
  if (n == 0) {
    n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  }
  if (const char* env = std::getenv("ONE2SET_THREADS")) {
    try {
      const auto cap = static_cast<std::size_t>(std::stoul(env));
      if (cap > 0) n = std::min(n, cap);
    } catch (const std::exception&) {
      throw ConfigError(std::string("ONE2SET_THREADS: not a number: ") + env);
    }
  }
  return std::max<std::size_t>(1, n);
}

}  // namespace one2set
