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

#include <random>

#include "one2set/one2set.hpp"
#include "test_util.hpp"

using namespace one2set;
using one2set::testing::random_tokens;
using one2set::testing::small_vocab;
using one2set::testing::tiny_config;

namespace {

std::vector<std::vector<double>> random_dists(std::mt19937_64& rng, std::size_t steps, std::size_t width) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> d(steps, std::vector<double>(width));
  for (auto& row : d) {
    double s = 0.0;
    for (auto& v : row) s += (v = u(rng));
    for (auto& v : row) v /= s;
  }
  return d;
}

KeyphraseTarget target(std::vector<int> ids, long pos = -1) {
  KeyphraseTarget t;
  t.ids = std::move(ids);
  t.words = {"x"};
  t.position = pos;
  return t;
}

}  // namespace

TEST(MatchingCost, HandCase) {
  std::vector<std::vector<double>> d(2, std::vector<double>(12, 0.0));
  d[0][9] = 0.5;
  d[1][kEosId] = 0.25;
  EXPECT_NEAR(matching_cost(target({9, kEosId}), d), -0.75, 1e-9);
}

TEST(MatchingCost, NullTargetCostsZero) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(matching_cost(KeyphraseTarget::null(), random_dists(rng, 2, 12)), 0.0);
}

TEST(MatchingCost, SumsMinOfLengthAndK) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const auto d = random_dists(rng, 2, 12);
    const auto t = target({8, 9, kEosId});
    EXPECT_EQ(matching_cost(t, d), -(d[0][8] + d[1][9]));
    const auto k1 = std::vector<std::vector<double>>(d.begin(), d.begin() + 1);
    EXPECT_EQ(matching_cost(target({8, kEosId}), k1), -d[0][8]);
  }
}

TEST(MatchingCost, OutOfRangeIdIsError) {
  std::vector<std::vector<double>> d(2, std::vector<double>(10, 0.1));
  EXPECT_THROW(matching_cost(target({10, kEosId}), d), std::out_of_range);
}

TEST(Rollout, ShapeAndDeterminism) {
  const auto vocab = small_vocab(10);
  const auto cfg = tiny_config(vocab.size(), 8);
  SetTransModel<double> m(cfg, 2);
  std::mt19937_64 rng(3);
  const auto doc = encode_document(random_tokens(rng, 10, 9), vocab);
  const auto r = rollout(m, doc, 2);
  ASSERT_EQ(r.codes(), 8u);
  EXPECT_EQ(r.steps(), 2u);
  for (std::size_t c = 0; c < 8; ++c) {
    EXPECT_EQ(r.tokens[c].size(), 2u);
    EXPECT_EQ(r.tokens[c][0], argmax<double>(r.dists[c][0]));
    EXPECT_EQ(r.dists[c][0].size(), doc.extended_size());
  }
  const auto again = rollout(m, doc, 2);
  EXPECT_EQ(again.dists, r.dists);
  EXPECT_EQ(rollout(m, doc, 1).steps(), 1u);
  EXPECT_THROW(rollout(m, doc, 0), std::invalid_argument);
}

TEST(Argmax, LowestIdWinsTies) {
  const std::vector<double> p{0.1, 0.4, 0.4, 0.1};
  EXPECT_EQ(argmax<double>(p), 1);
}

namespace {

RolloutDistributions<double> flat_rollout(std::size_t codes, std::size_t steps, std::size_t width) {
  RolloutDistributions<double> r;
  r.dists.assign(codes, std::vector<std::vector<double>>(steps, std::vector<double>(width, 1.0 / double(width))));
  r.tokens.assign(codes, std::vector<int>(steps, 0));
  return r;
}

}  // namespace

TEST(Assign, EmptyTargetsGiveAllNull) {
  const auto r = flat_rollout(4, 2, 12);
  const auto a = assign_targets<double>(TargetSet{}, &r, 4);
  for (const auto& t : a.per_code) EXPECT_TRUE(t.is_null);
  EXPECT_EQ(a.present.cost, 0.0);
  EXPECT_EQ(a.absent.cost, 0.0);
}

TEST(Assign, HalvesArePartitioned) {
  const auto r = flat_rollout(4, 2, 12);
  TargetSet ts;
  ts.present = {target({8, kEosId}, 0)};
  const auto a = assign_targets<double>(ts, &r, 4);
  int got = 0;
  for (std::size_t c = 0; c < 2; ++c) got += !a.per_code[c].is_null;
  EXPECT_EQ(got, 1);
  EXPECT_TRUE(a.per_code[2].is_null && a.per_code[3].is_null);
}

TEST(Assign, UniqueMatchWhenTwoCodesWantSamePhrase) {
  auto r = flat_rollout(4, 2, 12);
  for (std::size_t c : {0, 1}) {
    std::fill(r.dists[c][0].begin(), r.dists[c][0].end(), 0.0);
    r.dists[c][0][8] = 1.0;
  }
  r.dists[1][0][8] = 0.9;
  r.dists[1][0][9] = 0.1;
  TargetSet ts;
  ts.present = {target({8, kEosId}, 0)};
  const auto a = assign_targets<double>(ts, &r, 4);
  EXPECT_FALSE(a.per_code[0].is_null);
  EXPECT_TRUE(a.per_code[1].is_null);
}

TEST(Assign, FollowsRolloutPreference) {
  auto r = flat_rollout(4, 1, 12);
  // Code 2 favours token 11, code 3 favours token 10.
  r.dists[2][0][11] = 0.9;
  r.dists[3][0][10] = 0.9;
  TargetSet ts;
  ts.absent = {target({10, kEosId}), target({11, kEosId})};
  const auto a = assign_targets<double>(ts, &r, 4);
  EXPECT_EQ(a.per_code[2].ids[0], 11);
  EXPECT_EQ(a.per_code[3].ids[0], 10);
}

TEST(Assign, FixedModeUsesPositionOrder) {
  TargetSet ts;
  ts.present = {target({8, kEosId}, 5), target({9, kEosId}, 1)};
  ts.absent = {target({10, kEosId})};
  const auto a = assign_targets<double>(ts, nullptr, 6, AssignMode::kFixed);
  EXPECT_EQ(a.per_code[0].ids[0], 9);
  EXPECT_EQ(a.per_code[1].ids[0], 8);
  EXPECT_TRUE(a.per_code[2].is_null);
  EXPECT_EQ(a.per_code[3].ids[0], 10);
  EXPECT_TRUE(a.per_code[4].is_null);
}

TEST(Assign, RandomModeIsSeededPermutation) {
  TargetSet ts;
  ts.present = {target({8, kEosId}, 0), target({9, kEosId}, 1)};
  std::mt19937_64 r1(4), r2(4);
  const auto a = assign_targets<double>(ts, nullptr, 8, AssignMode::kRandom, &r1);
  const auto b = assign_targets<double>(ts, nullptr, 8, AssignMode::kRandom, &r2);
  EXPECT_EQ(a.present.target_of_code, b.present.target_of_code);
  int real = 0;
  for (std::size_t c = 0; c < 4; ++c) real += !a.per_code[c].is_null;
  EXPECT_EQ(real, 2);
  EXPECT_THROW(assign_targets<double>(ts, nullptr, 8, AssignMode::kRandom, nullptr), std::invalid_argument);
}

TEST(Assign, SingleModeMatchesJointly) {
  auto r = flat_rollout(4, 1, 12);
  r.dists[0][0][10] = 0.9;  // code 0 prefers the absent phrase
  TargetSet ts;
  ts.present = {target({8, kEosId}, 0)};
  ts.absent = {target({10, kEosId})};
  const auto a = assign_targets_single<double>(ts, &r, 4);
  EXPECT_EQ(a.per_code[0].ids[0], 10);
  EXPECT_EQ(a.per_code[1].ids[0], 8);
  EXPECT_TRUE(a.absent.codes.empty());
}

TEST(Assign, OverflowTruncationCounted) {
  TargetSet ts;
  for (int i = 0; i < 3; ++i) ts.present.push_back(target({8 + i, kEosId}, i));
  const auto r = flat_rollout(4, 2, 12);
  EXPECT_EQ(assign_targets<double>(ts, &r, 4).present.truncated, 1u);
}

TEST(AssignProperty, HungarianCostIsMinimal) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    RolloutDistributions<double> r;
    for (int c = 0; c < 6; ++c) r.dists.push_back(random_dists(rng, 2, 12));
    r.tokens.assign(6, {0, 0});
    TargetSet ts;
    ts.present = {target({8, 9, kEosId}, 0), target({10, kEosId}, 3)};
    ts.absent = {target({11, kEosId})};
    const auto a = assign_targets<double>(ts, &r, 6);
    const auto fixed = assign_targets<double>(ts, &r, 6, AssignMode::kFixed);
    EXPECT_LE(a.present.cost, fixed.present.cost + 1e-12);
    EXPECT_LE(a.absent.cost, fixed.absent.cost + 1e-12);
  }
}
