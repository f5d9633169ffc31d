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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "one2set/one2set.hpp"
#include "test_util.hpp"

using namespace one2set;
using one2set::testing::random_tokens;
using one2set::testing::small_vocab;
using one2set::testing::tiny_config;

namespace {

struct Fixture {
  Vocabulary vocab = small_vocab(10);
  ModelConfig cfg = tiny_config(vocab.size());
};

std::vector<typename SetTransModel<double>::DecodeRequest> requests(std::initializer_list<std::pair<std::size_t, std::vector<int>>> xs) {
  std::vector<typename SetTransModel<double>::DecodeRequest> out;
  for (const auto& [c, in] : xs) out.push_back({c, in});
  return out;
}

}  // namespace

TEST(Model, ConfigValidation) {
  ModelConfig c = tiny_config(20);
  c.num_codes = 3;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = tiny_config(20);
  c.embed_dim = 8;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = tiny_config(20);
  c.heads = 3;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = tiny_config(kNumReserved);
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Model, SameSeedSameMemory) {
  Fixture f;
  std::mt19937_64 rng(1);
  const auto doc = encode_document(random_tokens(rng, 10, 9), f.vocab);
  SetTransModel<double> a(f.cfg, 3), b(f.cfg, 3);
  const auto ma = a.encode_value(doc);
  EXPECT_EQ(ma.rows(), 9u);
  EXPECT_EQ(ma.cols(), f.cfg.model_dim);
  EXPECT_EQ(ma, b.encode_value(doc));
  EXPECT_EQ(ma, a.encode_value(doc));
}

TEST(Model, OverlongSourceTruncatedAndCounted) {
  Fixture f;
  f.cfg.max_source_len = 5;
  SetTransModel<double> m(f.cfg, 1);
  std::mt19937_64 rng(2);
  const auto doc = encode_document(random_tokens(rng, 10, 8), f.vocab);
  EXPECT_EQ(m.encode_value(doc).rows(), 5u);
  EXPECT_EQ(m.truncated_sources(), 1u);
}

TEST(Model, ZeroWeightEncoderIsEmbeddingPassThrough) {
  Fixture f;
  SetTransModel<double> m(f.cfg, 4);
  for (auto& p : m.params()) {
    if (p.name != "embed.word" && p.name != "encoder.norm.gain") p.value.fill(0.0);
  }
  const auto doc = encode_document({"w1", "w2", "w3"}, f.vocab);
  const auto mem = m.encode_value(doc);
  const auto& emb = m.params().find("embed.word")->value;
  const std::size_t d = f.cfg.model_dim;
  for (std::size_t r = 0; r < 3; ++r) {
    std::vector<double> x(d);
    positional_embedding<double>(r + 1, std::span<double>(x));
    for (std::size_t c = 0; c < d; ++c) x[c] += emb(static_cast<std::size_t>(doc.source_ids[r]), c);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / double(d);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= double(d);
    for (std::size_t c = 0; c < d; ++c) EXPECT_NEAR(mem(r, c), (x[c] - mean) / std::sqrt(var + 1e-5), 1e-12);
  }
}

TEST(Model, DecoderInputIsSumOfEmbeddings) {
  Fixture f;
  SetTransModel<double> m(f.cfg, 5);
  const auto& we = m.params().find("embed.word")->value;
  const auto& ce = m.params().find("embed.code")->value;
  const auto x = m.decoder_input(kBosId, 1, 2);
  std::vector<double> pe(f.cfg.model_dim);
  positional_embedding<double>(1, std::span<double>(pe));
  for (std::size_t c = 0; c < f.cfg.model_dim; ++c) EXPECT_EQ(x(0, c), we(kBosId, c) + pe[c] + ce(2, c));
  const auto y = m.decoder_input(kBosId, 1, 0);
  for (std::size_t c = 0; c < f.cfg.model_dim; ++c) EXPECT_NEAR(x(0, c) - y(0, c), ce(2, c) - ce(0, c), 1e-15);
}

TEST(Model, ZeroedCodesGiveIdenticalDecoders) {
  Fixture f;
  f.cfg.use_codes = false;
  SetTransModel<double> m(f.cfg, 6);
  std::mt19937_64 rng(3);
  const auto doc = encode_document(random_tokens(rng, 10, 7), f.vocab);
  const std::vector<std::size_t> codes{0, 1, 2, 3};
  const auto d = m.decode_step(m.encode_value(doc), doc, codes, {{}, {}, {}, {}});
  for (std::size_t i = 1; i < codes.size(); ++i) EXPECT_EQ(d[i], d[0]);
}

TEST(Model, DistributionsNormalized) {
  Fixture f;
  std::mt19937_64 rng(7);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SetTransModel<double> m(f.cfg, seed);
    const auto doc = encode_document(random_tokens(rng, 10, 6 + seed), f.vocab);
    Tape<double> t(m.params());
    const Var mem = m.encode(t, doc);
    const auto rq = requests({{0, {kBosId, 8, 9}}, {3, {kBosId}}, {1, {kBosId, static_cast<int>(doc.extended_size()) - 1}}});
    const auto dec = m.decode(t, mem, doc, rq);
    const auto& p = t.value(dec.probs);
    EXPECT_EQ(p.cols(), doc.extended_size());
    for (std::size_t r = 0; r < p.rows(); ++r) {
      double s = 0.0;
      for (double v : p.row(r)) {
        EXPECT_GE(v, 0.0);
        s += v;
      }
      EXPECT_NEAR(s, 1.0, 1e-5);
    }
  }
}

TEST(Model, GateOneLeavesOovSlotsEmpty) {
  Fixture f;
  SetTransModel<double> m(f.cfg, 8);
  m.gate_override = 1.0;
  const auto doc = encode_document({"w1", "rare", "w2"}, f.vocab);
  const std::vector<std::size_t> codes{0, 1};
  for (const auto& dist : m.decode_step(m.encode_value(doc), doc, codes, {{}, {}}))
    EXPECT_EQ(dist[f.vocab.size()], 0.0);
}

TEST(Model, GateZeroPutsMassOnSourceTokensOnly) {
  Fixture f;
  SetTransModel<double> m(f.cfg, 9);
  m.gate_override = 0.0;
  const auto doc = encode_document({"w1", "rare", "w2", "w1"}, f.vocab);
  std::set<std::size_t> source(doc.extended_ids.begin(), doc.extended_ids.end());
  const std::vector<std::size_t> codes{0, 1, 2, 3};
  for (const auto& dist : m.decode_step(m.encode_value(doc), doc, codes, {{}, {}, {}, {}})) {
    double s = 0.0;
    for (std::size_t id = 0; id < dist.size(); ++id) {
      if (!source.count(id)) {
        EXPECT_EQ(dist[id], 0.0) << id;
      }
      s += dist[id];
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
    EXPECT_GT(dist[f.vocab.size()], 0.0);  // the OOV word's slot
  }
}

TEST(Model, CodesDoNotAttendToEachOther) {
  Fixture f;
  SetTransModel<double> m(f.cfg, 10);
  std::mt19937_64 rng(5);
  const auto doc = encode_document(random_tokens(rng, 10, 8), f.vocab);
  Tape<double> t(m.params());
  const Var mem = m.encode(t, doc);
  const auto stacked = m.decode(t, mem, doc, requests({{0, {kBosId, 8}}, {1, {kBosId, 9, 10}}, {2, {kBosId}}}));
  const auto& ps = t.value(stacked.probs);
  const auto alone = m.decode(t, mem, doc, requests({{1, {kBosId, 9, 10}}}));
  const auto& pa = t.value(alone.probs);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < pa.cols(); ++c) EXPECT_EQ(ps(stacked.offsets[1] + r, c), pa(r, c));
}

TEST(Model, CausalWithinStream) {
  Fixture f;
  SetTransModel<double> m(f.cfg, 11);
  std::mt19937_64 rng(6);
  const auto doc = encode_document(random_tokens(rng, 10, 8), f.vocab);
  Tape<double> t(m.params());
  const Var mem = m.encode(t, doc);
  const auto a = m.decode(t, mem, doc, requests({{0, {kBosId, 8, 9}}}));
  const auto b = m.decode(t, mem, doc, requests({{0, {kBosId, 8, 12}}}));
  for (std::size_t c = 0; c < doc.extended_size(); ++c) {
    EXPECT_EQ(t.value(a.probs)(0, c), t.value(b.probs)(0, c));
    EXPECT_EQ(t.value(a.probs)(1, c), t.value(b.probs)(1, c));
  }
}

TEST(Model, CopyProducesOovWord) {
  Fixture f;
  SetTransModel<double> m(f.cfg, 12);
  m.gate_override = 0.0;
  const auto doc = encode_document({"rare"}, f.vocab);
  const auto out = generate(m, doc, 1);
  ASSERT_EQ(out[0].size(), 1u);
  EXPECT_EQ(surface(out[0][0], doc, f.vocab), "rare");
}

TEST(Autograd, GradientCheckLayerOps) {
  // Small composite of every differentiable op, checked numerically.
  ParameterSet<double> ps;
  std::mt19937_64 rng(3);
  for (auto [name, r, c] : std::vector<std::tuple<const char*, std::size_t, std::size_t>>{
           {"a", 3, 4}, {"b", 4, 4}, {"g", 1, 4}, {"bias", 1, 4}, {"w", 4, 1}}) {
    const auto i = ps.add(name, r, c);
    fill_uniform(ps[i].value, 1.0, rng);
  }
  auto f = [&](Tape<double>& t) {
    using namespace ops;
    Var a = t.param(0), b = t.param(1);
    Var x = layer_norm(t, a, t.param(2), t.param(3));
    Var h = relu(t, add_row(t, matmul(t, x, b), t.param(3)));
    Var s = masked_softmax(t, matmul_nt(t, h, x), {{0, 1}, {0, 2}, {1, 3}});
    Var y = concat_cols(t, {slice_cols(t, matmul(t, s, h), 0, 2), scale(t, gather_rows(t, b, {3, 0, 3}), 0.5)});
    Var g = sigmoid(t, matmul(t, x, t.param(4)));
    Var p = gate_mix(t, g, pad_cols(t, softmax_rows(t, y), 6), scatter_cols(t, s, {5, 1, 5}, 6));
    return weighted_nll(t, p, {0, 1, 2, 2}, {0, 5, 1, 3}, {1.0, 0.5, 2.0, 1.0});
  };
  Gradients<double> g(ps);
  {
    Tape<double> t(ps, &g);
    t.backward(f(t));
  }
  const double h = 1e-6;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t k = 0; k < ps[i].value.size(); ++k) {
      double& w = ps[i].value.data()[k];
      const double orig = w;
      w = orig + h;
      Tape<double> tp(ps);
      const double up = tp.value(f(tp))(0, 0);
      w = orig - h;
      Tape<double> tm(ps);
      const double down = tm.value(f(tm))(0, 0);
      w = orig;
      EXPECT_NEAR(g[i].data()[k], (up - down) / (2 * h), 1e-6) << ps[i].name << "[" << k << "]";
    }
  }
}

TEST(Autograd, ForwardOnlyTapeRejectsBackward) {
  ParameterSet<double> ps;
  ps.add("x", 1, 1);
  Tape<double> t(ps);
  EXPECT_FALSE(t.recording());
  EXPECT_THROW(t.backward(t.param(0)), std::logic_error);
}
