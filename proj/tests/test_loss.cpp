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

#include "one2set/one2set.hpp"
#include "test_util.hpp"

using namespace one2set;
using one2set::testing::random_tokens;
using one2set::testing::small_vocab;
using one2set::testing::tiny_config;

namespace {

// Output distribution pinned to softmax(output.b): every other weight zero,
// generation only.
SetTransModel<double> pinned_model(const Vocabulary& v, std::size_t codes, const std::vector<double>& logits) {
  SetTransModel<double> m(tiny_config(v.size(), codes), 1);
  for (auto& p : m.params()) p.value.fill(0.0);
  auto& b = m.params().find("output.b")->value;
  for (std::size_t i = 0; i < logits.size(); ++i) b(0, i) = logits[i];
  m.gate_override = 1.0;
  return m;
}

double loss_value(const SetTransModel<double>& m, const Document& doc, const std::vector<KeyphraseTarget>& per_code,
                  const LossConfig& lc, double* present = nullptr, double* absent = nullptr) {
  Tape<double> t(m.params());
  const auto terms = set_loss(t, m, m.encode(t, doc), doc, per_code, lc);
  if (present) *present = t.value(terms.present)(0, 0);
  if (absent && terms.absent.valid()) *absent = t.value(terms.absent)(0, 0);
  return t.value(terms.total)(0, 0);
}

}  // namespace

TEST(Loss, HandCaseTeacherForced) {
  const auto v = small_vocab(5);
  const int w = 8;
  std::vector<double> logits(v.size(), std::log(0.25 / double(v.size() - 2)));
  logits[w] = std::log(0.5);
  logits[kEosId] = std::log(0.25);
  const auto m = pinned_model(v, 2, logits);
  const auto doc = encode_document({"w0", "w1"}, v);
  KeyphraseTarget t;
  t.ids = {w, kEosId};
  LossConfig lc;
  lc.lambda_abs = 0.0;
  EXPECT_NEAR(loss_value(m, doc, {t, KeyphraseTarget::null()}, lc), -(std::log(0.5) + std::log(0.25)), 1e-6);
  EXPECT_NEAR(-(std::log(0.5) + std::log(0.25)), 2.0794415416798357, 1e-12);
}

TEST(Loss, WeightedNllHandCase) {
  ParameterSet<double> ps;
  Tape<double> t(ps);
  Matrix<double> p(2, 4, 0.0);
  p(0, 1) = 0.5;
  p(1, 3) = 0.25;
  const Var l = ops::weighted_nll(t, t.constant(p), {0, 1}, {1, 3}, {1.0, 1.0});
  EXPECT_NEAR(t.value(l)(0, 0), 2.0794415416798357, 1e-12);
}

TEST(Loss, AllNullWithZeroLambdaIsZero) {
  const auto v = small_vocab(10);
  SetTransModel<double> m(tiny_config(v.size(), 4), 3);
  std::mt19937_64 rng(1);
  const auto doc = encode_document(random_tokens(rng, 10, 8), v);
  LossConfig lc;
  lc.lambda_pre = lc.lambda_abs = 0.0;
  EXPECT_EQ(loss_value(m, doc, std::vector<KeyphraseTarget>(4, KeyphraseTarget::null()), lc), 0.0);
}

class LossProperties : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(LossProperties, SeparateDecompositionAndLambdaZero) {
  const auto v = small_vocab(10);
  SetTransModel<double> m(tiny_config(v.size(), 4), GetParam());
  std::mt19937_64 rng(GetParam());
  const auto doc = encode_document(random_tokens(rng, 10, 8), v);
  auto phrase = [&](std::initializer_list<const char*> ws) { return encode_target(Tokens(ws.begin(), ws.end()), doc, v); };
  const std::vector<KeyphraseTarget> per_code{phrase({"w1", "w2"}), KeyphraseTarget::null(), KeyphraseTarget::null(),
                                              phrase({"w7"})};
  LossConfig lc;
  double pre = 0.0, abs = 0.0;
  const double total = loss_value(m, doc, per_code, lc, &pre, &abs);
  EXPECT_NEAR(pre + abs, total, 1e-6);
  EXPECT_GT(pre, 0.0);
  EXPECT_GT(abs, 0.0);

  // lambda = 0 equals the loss with the null-assigned codes removed.
  lc.lambda_pre = lc.lambda_abs = 0.0;
  const double zero = loss_value(m, doc, per_code, lc);
  Tape<double> t(m.params());
  const Var mem = m.encode(t, doc);
  std::vector<SetTransModel<double>::DecodeRequest> rq{{0, {kBosId, per_code[0].ids[0], per_code[0].ids[1]}},
                                                       {3, {kBosId, per_code[3].ids[0]}}};
  const auto dec = m.decode(t, mem, doc, rq);
  const auto& p = t.value(dec.probs);
  double manual_pre = 0.0, manual_abs = 0.0;
  for (std::size_t k = 0; k < 3; ++k) manual_pre -= std::log(p(k, static_cast<std::size_t>(per_code[0].ids[k])));
  for (std::size_t k = 0; k < 2; ++k) manual_abs -= std::log(p(3 + k, static_cast<std::size_t>(per_code[3].ids[k])));
  const double manual = manual_pre + manual_abs;
  EXPECT_EQ(zero, manual);

  // lambda = 1 equals the unweighted sum.
  lc.lambda_pre = lc.lambda_abs = 1.0;
  const double full = loss_value(m, doc, per_code, lc);
  Tape<double> t2(m.params());
  const Var mem2 = m.encode(t2, doc);
  std::vector<SetTransModel<double>::DecodeRequest> rq2{{1, {kBosId}}, {2, {kBosId}}};
  const auto dec2 = m.decode(t2, mem2, doc, rq2);
  const auto& p2 = t2.value(dec2.probs);
  EXPECT_NEAR(full, manual - std::log(p2(0, kNullId)) - std::log(p2(1, kNullId)), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Seeds, LossProperties, ::testing::Values(1, 2, 3, 4, 5));

TEST(Loss, SingleModeUsesPresentScaleEverywhere) {
  const auto v = small_vocab(10);
  SetTransModel<double> m(tiny_config(v.size(), 4), 7);
  std::mt19937_64 rng(7);
  const auto doc = encode_document(random_tokens(rng, 10, 8), v);
  const std::vector<KeyphraseTarget> nulls(4, KeyphraseTarget::null());
  LossConfig sep, single;
  sep.lambda_pre = sep.lambda_abs = 0.3;
  single.lambda_pre = 0.3;
  single.lambda_abs = 0.9;
  single.mode = SetLossMode::kSingle;
  EXPECT_NEAR(loss_value(m, doc, nulls, sep), loss_value(m, doc, nulls, single), 1e-12);
}

TEST(Loss, InvalidConfigRejected) {
  LossConfig lc;
  lc.lambda_pre = -0.1;
  EXPECT_THROW(lc.validate(), std::invalid_argument);
  lc.lambda_pre = 1.5;
  EXPECT_THROW(lc.validate(), std::invalid_argument);
}

TEST(Loss, StudentForcingFeedsGreedyTokens) {
  const auto v = small_vocab(10);
  SetTransModel<double> m(tiny_config(v.size(), 2), 8);
  std::mt19937_64 rng(8);
  const auto doc = encode_document(random_tokens(rng, 10, 8), v);
  const auto tgt = encode_target({"w1", "w2"}, doc, v);
  LossConfig lc;
  lc.forcing = Forcing::kStudent;
  const double student = loss_value(m, doc, {tgt, KeyphraseTarget::null()}, lc);
  const auto mem = m.encode_value(doc);
  const auto fed = greedy_tokens(m, mem, doc, {0}, {2});
  Tape<double> t(m.params());
  std::vector<SetTransModel<double>::DecodeRequest> rq{{0, {kBosId, fed[0][0], fed[0][1]}}, {1, {kBosId}}};
  const auto dec = m.decode(t, t.constant(mem), doc, rq);
  const auto& p = t.value(dec.probs);
  double manual = 0.0;
  for (std::size_t k = 0; k < 3; ++k) manual -= std::log(p(k, static_cast<std::size_t>(tgt.ids[k])));
  manual -= lc.lambda_abs * std::log(p(3, kNullId));
  EXPECT_NEAR(student, manual, 1e-12);
}

TEST(One2SeqLoss, UniformPredictionsGiveLengthTimesLogV) {
  const auto v = small_vocab(5);
  const auto m = pinned_model(v, 2, std::vector<double>(v.size(), 0.0));
  const auto doc = encode_document({"w0", "w1"}, v);
  Tape<double> t(m.params());
  const std::vector<int> seq{8, kSepId, 9, 10, kEosId};
  const Var l = one2seq_loss(t, m, m.encode(t, doc), doc, seq);
  EXPECT_NEAR(t.value(l)(0, 0), 5.0 * std::log(double(v.size())), 1e-9);
}

class GradientCheck : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(GradientCheck, FullPipelineDouble) {
  const auto r = one2set::testing::pipeline_gradient_check(GetParam());
  EXPECT_GT(r.scalars, 500u);
  EXPECT_LT(r.max_scalar_error, 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Seeds, GradientCheck, ::testing::Range<std::uint64_t>(0, 6));
