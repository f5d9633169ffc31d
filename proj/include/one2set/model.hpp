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

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "one2set/autograd.hpp"
#include "one2set/corpus.hpp"
#include "one2set/tensor.hpp"
#include "one2set/vocabulary.hpp"

namespace one2set {

struct ModelConfig {
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t model_dim = 64;
  std::size_t ff_dim = 128;
  std::size_t embed_dim = 64;  // must equal model_dim; embeddings feed the stack directly
  std::size_t vocab_size = 0;
  std::size_t num_codes = 8;
  std::size_t max_phrase_len = 6;
  std::size_t max_source_len = 256;
  double dropout = 0.0;
  bool use_codes = true;  // false pins every control code to zero
  bool one2seq = false;   // single <sep>-joined stream on code 0

  void validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("model config: " + m); };
    if (layers == 0) fail("layers must be positive");
    if (heads == 0 || model_dim % heads != 0) fail("model_dim must be divisible by heads");
    if (embed_dim != model_dim) fail("embed_dim must equal model_dim");
    if (vocab_size <= static_cast<std::size_t>(kNumReserved)) fail("vocab_size too small");
    if (num_codes == 0 || num_codes % 2 != 0) fail("num_codes must be even and positive");
    if (max_phrase_len < 2) fail("max_phrase_len must be at least 2");
    if (max_source_len == 0) fail("max_source_len must be positive");
    if (dropout < 0.0 || dropout >= 1.0) fail("dropout must be in [0, 1)");
  }
};

// Copyable event counter shared by concurrent forward passes.
struct RelaxedCounter {
  std::atomic<std::size_t> value{0};
  RelaxedCounter() = default;
  RelaxedCounter(const RelaxedCounter& o) : value(o.value.load()) {}
  RelaxedCounter& operator=(const RelaxedCounter& o) {
    value = o.value.load();
    return *this;
  }
  void operator++() { value.fetch_add(1, std::memory_order_relaxed); }
  std::size_t load() const { return value.load(); }
};

template <typename T>
class SetTransModel {
 public:
  // One decoder stream: `inputs` are y_0 = BOS, y_1, ..., y_{T-1}
  // (extended ids); the stream yields T distributions.
  struct DecodeRequest {
    std::size_t code = 0;
    std::vector<int> inputs;
  };

  struct Decoded {
    Var probs;                         // rows x extended vocabulary
    std::vector<std::size_t> offsets;  // first row of each request
    Var gate;                          // rows x 1
    Var copy_attention;                // rows x source length
  };

  SetTransModel(ModelConfig cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    build();
    initialize(seed);
  }

  const ModelConfig& config() const { return cfg_; }
  ParameterSet<T>& params() { return params_; }
  const ParameterSet<T>& params() const { return params_; }

  // Forces the copy gate g (1 = generate only, 0 = copy only). Test hook.
  std::optional<T> gate_override;

  std::size_t truncated_sources() const { return truncated_.load(); }

  std::size_t source_length(const Document& doc) const {
    return std::min(doc.source_ids.size(), cfg_.max_source_len);
  }

  Var encode(Tape<T>& t, const Document& doc) const {
    if (doc.source_ids.empty()) throw std::invalid_argument("encode: empty document");
    if (doc.source_ids.size() > cfg_.max_source_len) ++truncated_;
    const std::size_t len = source_length(doc);
    std::vector<int> ids(doc.source_ids.begin(), doc.source_ids.begin() + static_cast<long>(len));
    Var x = ops::gather_rows(t, t.param(ids_.word_embed), std::move(ids));
    Matrix<T> pos(len, cfg_.model_dim);
    for (std::size_t r = 0; r < len; ++r) positional_embedding<T>(r + 1, pos.row(r));
    x = ops::add(t, x, t.constant(std::move(pos)));
    x = ops::dropout(t, x, cfg_.dropout);
    const std::vector<RowRange> all(len, RowRange{0, len});
    for (const auto& layer : encoder_) {
      Var h = norm(t, x, layer.ln1);
      x = ops::add(t, x, ops::dropout(t, attend(t, layer.self_attn, h, h, all, nullptr), cfg_.dropout));
      h = norm(t, x, layer.ln2);
      x = ops::add(t, x, ops::dropout(t, feed_forward(t, layer.ff, h), cfg_.dropout));
    }
    return norm(t, x, enc_norm_);
  }

  // d = e^w(prev) + e^p(t) + c^code for a single decoder position.
  Matrix<T> decoder_input(int prev, std::size_t step, std::size_t code) const {
    if (code >= cfg_.num_codes) throw std::out_of_range("control code index");
    Matrix<T> out(1, cfg_.model_dim);
    positional_embedding<T>(step, out.row(0));
    const auto& we = params_[ids_.word_embed].value;
    const auto& ce = params_[ids_.code_embed].value;
    const auto w = static_cast<std::size_t>(embed_id(prev));
    for (std::size_t c = 0; c < cfg_.model_dim; ++c) {
      out(0, c) += we(w, c);
      if (cfg_.use_codes) out(0, c) += ce(code, c);
    }
    return out;
  }

  Decoded decode(Tape<T>& t, Var memory, const Document& doc,
                 std::span<const DecodeRequest> requests) const {
    const std::size_t d = cfg_.model_dim;
    const std::size_t src_len = t.value(memory).rows();
    const std::size_t ext = doc.extended_size();

    Decoded out;
    std::size_t rows = 0;
    for (const auto& rq : requests) {
      if (rq.inputs.empty()) throw std::invalid_argument("decode: empty request");
      if (rq.code >= cfg_.num_codes) throw std::out_of_range("decode: control code index");
      out.offsets.push_back(rows);
      rows += rq.inputs.size();
    }

    std::vector<int> words;
    std::vector<int> codes;
    std::vector<RowRange> self_windows;
    Matrix<T> pos(rows, d);
    words.reserve(rows);
    for (std::size_t i = 0; i < requests.size(); ++i) {
      const auto& rq = requests[i];
      const std::size_t base = out.offsets[i];
      for (std::size_t p = 0; p < rq.inputs.size(); ++p) {
        words.push_back(embed_id(rq.inputs[p]));
        codes.push_back(static_cast<int>(rq.code));
        self_windows.emplace_back(base, base + p + 1);
        positional_embedding<T>(p + 1, pos.row(base + p));
      }
    }

    Var x = ops::gather_rows(t, t.param(ids_.word_embed), std::move(words));
    x = ops::add(t, x, t.constant(std::move(pos)));
    if (cfg_.use_codes) {
      x = ops::add(t, x, ops::gather_rows(t, t.param(ids_.code_embed), std::move(codes)));
    }
    const Var input = x;
    x = ops::dropout(t, x, cfg_.dropout);

    const std::vector<RowRange> cross_windows(rows, RowRange{0, src_len});
    Var copy_attn;
    for (std::size_t l = 0; l < decoder_.size(); ++l) {
      const auto& layer = decoder_[l];
      Var h = norm(t, x, layer.ln1);
      x = ops::add(t, x, ops::dropout(t, attend(t, layer.self_attn, h, h, self_windows, nullptr), cfg_.dropout));
      h = norm(t, x, layer.ln2);
      Var* probs_out = (l + 1 == decoder_.size()) ? &copy_attn : nullptr;
      x = ops::add(t, x, ops::dropout(t, attend(t, layer.cross_attn, h, memory, cross_windows, probs_out), cfg_.dropout));
      h = norm(t, x, layer.ln3);
      x = ops::add(t, x, ops::dropout(t, feed_forward(t, layer.ff, h), cfg_.dropout));
    }
    Var h = norm(t, x, dec_norm_);

    Var logits = ops::add_row(t, ops::matmul(t, h, t.param(ids_.out_w)), t.param(ids_.out_b));
    Var gen = ops::pad_cols(t, ops::softmax_rows(t, logits), ext);
    std::vector<int> scatter(doc.extended_ids.begin(), doc.extended_ids.begin() + static_cast<long>(src_len));
    Var copy = ops::scatter_cols(t, copy_attn, std::move(scatter), ext);

    Var gate;
    if (gate_override) {
      gate = t.constant(Matrix<T>(rows, 1, *gate_override));
    } else {
      Var context = ops::matmul(t, copy_attn, memory);
      Var features = ops::concat_cols(t, {h, context, input});
      gate = ops::sigmoid(t, ops::add_row(t, ops::matmul(t, features, t.param(ids_.gate_w)),
                                          t.param(ids_.gate_b)));
    }
    out.probs = ops::gate_mix(t, gate, gen, copy);
    out.gate = gate;
    out.copy_attention = copy_attn;
    return out;
  }

  // Next-token distribution of every listed code given its prefix
  // (the prefix excludes BOS; all prefixes share one step index).
  std::vector<std::vector<T>> decode_step(const Matrix<T>& memory, const Document& doc,
                                          std::span<const std::size_t> codes,
                                          const std::vector<std::vector<int>>& prefixes) const {
    Tape<T> t(params_);
    Var mem = t.constant(memory);
    std::vector<DecodeRequest> rq(codes.size());
    for (std::size_t i = 0; i < codes.size(); ++i) {
      rq[i].code = codes[i];
      rq[i].inputs.push_back(kBosId);
      rq[i].inputs.insert(rq[i].inputs.end(), prefixes[i].begin(), prefixes[i].end());
    }
    Decoded dec = decode(t, mem, doc, rq);
    const auto& probs = t.value(dec.probs);
    std::vector<std::vector<T>> out(codes.size());
    for (std::size_t i = 0; i < codes.size(); ++i) {
      auto row = probs.row(dec.offsets[i] + rq[i].inputs.size() - 1);
      out[i].assign(row.begin(), row.end());
    }
    return out;
  }

  Matrix<T> encode_value(const Document& doc) const {
    Tape<T> t(params_);
    return t.value(encode(t, doc));
  }

 private:
  struct NormIds {
    std::size_t gain = 0, bias = 0;
  };
  struct AttnIds {
    std::size_t wq = 0, bq = 0, wk = 0, bk = 0, wv = 0, bv = 0, wo = 0, bo = 0;
  };
  struct FfIds {
    std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0;
  };
  struct EncoderLayer {
    NormIds ln1, ln2;
    AttnIds self_attn;
    FfIds ff;
  };
  struct DecoderLayer {
    NormIds ln1, ln2, ln3;
    AttnIds self_attn, cross_attn;
    FfIds ff;
  };
  struct TopIds {
    std::size_t word_embed = 0, code_embed = 0, out_w = 0, out_b = 0, gate_w = 0, gate_b = 0;
  };

  int embed_id(int ext_id) const {
    if (ext_id < 0) throw std::out_of_range("negative token id");
    return static_cast<std::size_t>(ext_id) < cfg_.vocab_size ? ext_id : kUnkId;
  }

  NormIds add_norm(const std::string& prefix) {
    return {params_.add(prefix + ".gain", 1, cfg_.model_dim),
            params_.add(prefix + ".bias", 1, cfg_.model_dim)};
  }
  AttnIds add_attn(const std::string& p) {
    const std::size_t d = cfg_.model_dim;
    AttnIds a;
    a.wq = params_.add(p + ".wq", d, d);
    a.bq = params_.add(p + ".bq", 1, d);
    a.wk = params_.add(p + ".wk", d, d);
    a.bk = params_.add(p + ".bk", 1, d);
    a.wv = params_.add(p + ".wv", d, d);
    a.bv = params_.add(p + ".bv", 1, d);
    a.wo = params_.add(p + ".wo", d, d);
    a.bo = params_.add(p + ".bo", 1, d);
    return a;
  }
  FfIds add_ff(const std::string& p) {
    FfIds f;
    f.w1 = params_.add(p + ".w1", cfg_.model_dim, cfg_.ff_dim);
    f.b1 = params_.add(p + ".b1", 1, cfg_.ff_dim);
    f.w2 = params_.add(p + ".w2", cfg_.ff_dim, cfg_.model_dim);
    f.b2 = params_.add(p + ".b2", 1, cfg_.model_dim);
    return f;
  }

  void build() {
    const std::size_t d = cfg_.model_dim;
    ids_.word_embed = params_.add("embed.word", cfg_.vocab_size, d);
    ids_.code_embed = params_.add("embed.code", cfg_.num_codes, d);
    for (std::size_t l = 0; l < cfg_.layers; ++l) {
      const std::string p = "encoder." + std::to_string(l);
      EncoderLayer e;
      e.ln1 = add_norm(p + ".ln1");
      e.self_attn = add_attn(p + ".self_attn");
      e.ln2 = add_norm(p + ".ln2");
      e.ff = add_ff(p + ".ff");
      encoder_.push_back(e);
    }
    enc_norm_ = add_norm("encoder.norm");
    for (std::size_t l = 0; l < cfg_.layers; ++l) {
      const std::string p = "decoder." + std::to_string(l);
      DecoderLayer dl;
      dl.ln1 = add_norm(p + ".ln1");
      dl.self_attn = add_attn(p + ".self_attn");
      dl.ln2 = add_norm(p + ".ln2");
      dl.cross_attn = add_attn(p + ".cross_attn");
      dl.ln3 = add_norm(p + ".ln3");
      dl.ff = add_ff(p + ".ff");
      decoder_.push_back(dl);
    }
    dec_norm_ = add_norm("decoder.norm");
    ids_.out_w = params_.add("output.w", d, cfg_.vocab_size);
    ids_.out_b = params_.add("output.b", 1, cfg_.vocab_size);
    ids_.gate_w = params_.add("copy_gate.w", 3 * d, 1);
    ids_.gate_b = params_.add("copy_gate.b", 1, 1);
  }

  void initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (auto& p : params_) {
      auto& v = p.value;
      const std::string& n = p.name;
      if (n.ends_with(".gain")) {
        v.fill(T(1));
      } else if (n.rfind("embed.", 0) == 0) {
        fill_uniform(v, T(1), rng);
      } else if (v.rows() == 1) {
        v.fill(T(0));  // biases
      } else {
        const double limit = std::sqrt(6.0 / static_cast<double>(v.rows() + v.cols()));
        fill_uniform(v, static_cast<T>(limit), rng);
      }
    }
    if (!cfg_.use_codes) params_[ids_.code_embed].value.fill(T(0));
  }

  Var norm(Tape<T>& t, Var x, const NormIds& n) const {
    return ops::layer_norm(t, x, t.param(n.gain), t.param(n.bias));
  }

  Var linear(Tape<T>& t, Var x, std::size_t w, std::size_t b) const {
    return ops::add_row(t, ops::matmul(t, x, t.param(w)), t.param(b));
  }

  Var feed_forward(Tape<T>& t, const FfIds& f, Var x) const {
    Var h = ops::relu(t, linear(t, x, f.w1, f.b1));
    h = ops::dropout(t, h, cfg_.dropout);
    return linear(t, h, f.w2, f.b2);
  }

  // Multi-head attention; optionally exposes the head-averaged weights.
  Var attend(Tape<T>& t, const AttnIds& a, Var query_in, Var kv_in,
             const std::vector<RowRange>& windows, Var* mean_probs) const {
    const std::size_t d = cfg_.model_dim;
    const std::size_t dh = d / cfg_.heads;
    const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(dh));
    Var q = linear(t, query_in, a.wq, a.bq);
    Var k = linear(t, kv_in, a.wk, a.bk);
    Var v = linear(t, kv_in, a.wv, a.bv);
    std::vector<Var> heads;
    Var prob_sum;
    for (std::size_t h = 0; h < cfg_.heads; ++h) {
      Var qh = ops::slice_cols(t, q, h * dh, (h + 1) * dh);
      Var kh = ops::slice_cols(t, k, h * dh, (h + 1) * dh);
      Var vh = ops::slice_cols(t, v, h * dh, (h + 1) * dh);
      Var scores = ops::scale(t, ops::matmul_nt(t, qh, kh), inv_sqrt);
      Var probs = ops::masked_softmax(t, scores, windows);
      if (mean_probs) prob_sum = prob_sum.valid() ? ops::add(t, prob_sum, probs) : probs;
      heads.push_back(ops::matmul(t, probs, vh));
    }
    if (mean_probs) *mean_probs = ops::scale(t, prob_sum, T(1) / static_cast<T>(cfg_.heads));
    Var cat = heads.size() == 1 ? heads.front() : ops::concat_cols(t, heads);
    return linear(t, cat, a.wo, a.bo);
  }

  ModelConfig cfg_;
  ParameterSet<T> params_;
  TopIds ids_;
  std::vector<EncoderLayer> encoder_;
  std::vector<DecoderLayer> decoder_;
  NormIds enc_norm_, dec_norm_;
  mutable RelaxedCounter truncated_;
};

}  // namespace one2set
