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

#include <sstream>

#include "one2set/one2set.hpp"

using namespace one2set;

namespace {

TrainConfig small_train_config() {
  TrainConfig c;
  c.model.layers = 1;
  c.model.heads = 2;
  c.model.model_dim = c.model.embed_dim = 16;
  c.model.ff_dim = 32;
  c.model.num_codes = 4;
  c.model.max_phrase_len = 4;
  c.batch_size = 4;
  c.max_steps = 6;
  c.adam.learning_rate = 1e-3;
  c.threads = 2;
  c.seed = 11;
  return c;
}

const TrainingData& small_data() {
  static const TrainingData d = [] {
    SyntheticSpec s;
    s.vocab_size = 60;
    s.documents = 16;
    s.min_doc_len = 10;
    s.max_doc_len = 16;
    s.min_phrases = 1;
    s.max_phrases = 3;
    const auto raw = generate_synthetic(s);
    return build_training_data(small_train_config(),
                               std::vector<RawSample>(raw.begin(), raw.begin() + 12),
                               std::vector<RawSample>(raw.begin() + 12, raw.end()));
  }();
  return d;
}

std::size_t scalar_count(const SetTransModel<float>& m) {
  std::size_t n = 0;
  for (const auto& p : m.params()) n += p.value.size();
  return n;
}

std::size_t lines(const std::ostringstream& os) {
  const std::string s = os.str();
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST(MixSeed, DistinctStreams) {
  EXPECT_NE(mix_seed(1, 2, 3), mix_seed(1, 3, 2));
  EXPECT_EQ(mix_seed(4, 5, 6), mix_seed(4, 5, 6));
}

TEST(ParallelChunks, CoversEveryItemOnceInContiguousBlocks) {
  std::vector<std::size_t> owner(10, 99);
  parallel_chunks(3, owner.size(), [&](std::size_t w, std::size_t i) { owner[i] = w; });
  EXPECT_EQ(owner, (std::vector<std::size_t>{0, 0, 0, 0, 1, 1, 1, 1, 2, 2}));
  EXPECT_THROW(parallel_chunks(2, 4, [](std::size_t, std::size_t i) {
                 if (i == 3) throw std::runtime_error("x");
               }),
               std::runtime_error);
}

TEST(Train, SameSeedSameWorkersIsBitIdentical) {
  const auto cfg = small_train_config();
  std::ostringstream a_log, b_log;
  const auto a = train<float>(cfg, small_data(), &a_log);
  const auto b = train<float>(cfg, small_data(), &b_log);
  EXPECT_EQ(a_log.str(), b_log.str());
  EXPECT_EQ(parameter_hash(a.model), parameter_hash(b.model));
  auto other = cfg;
  other.seed = 12;
  EXPECT_NE(parameter_hash(train<float>(other, small_data()).model), parameter_hash(a.model));
}

TEST(Train, LogHasOneRowPerStepAndValidation) {
  auto cfg = small_train_config();
  cfg.eval_every = 3;
  std::ostringstream log;
  const auto r = train<float>(cfg, small_data(), &log);
  EXPECT_EQ(r.log.size(), 6u);
  EXPECT_TRUE(r.log[2].valid_score.has_value());
  EXPECT_FALSE(r.log[3].valid_score.has_value());
  EXPECT_TRUE(r.log[5].valid_score.has_value());
  EXPECT_EQ(lines(log), 7u);
  EXPECT_EQ(log.str().rfind("step,loss,present_loss,absent_loss,null_ratio_present,null_ratio_absent,valid_score", 0), 0u);
}

TEST(Train, PatienceStopsEarly) {
  auto cfg = small_train_config();
  cfg.max_steps = 200;
  cfg.eval_every = 1;
  cfg.patience = 2;
  cfg.adam.learning_rate = 1e-9;
  const auto r = train<float>(cfg, small_data());
  EXPECT_TRUE(r.early_stopped);
  EXPECT_LT(r.steps, 200u);
  EXPECT_EQ(r.best_step, 1u);
}

TEST(Train, DivergenceAbortsWithDiagnostics) {
  auto cfg = small_train_config();
  cfg.adam.learning_rate = 1e30;
  cfg.max_steps = 20;
  try {
    train<float>(cfg, small_data());
    FAIL() << "expected divergence";
  } catch (const TrainingDiverged& e) {
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

TEST(Train, AblationsKeepParameterCount) {
  const auto base = train<float>(small_train_config(), small_data());
  for (const char* flag : {"no_codes", "fixed_assign", "random_assign", "student_forcing", "single_set_loss",
                           "one2seq_baseline"}) {
    auto cfg = small_train_config();
    auto kv = KeyValueConfig::parse_string(std::string(flag) + " = true\n");
    const auto parsed = TrainConfig::from(kv);
    cfg.ablations = parsed.ablations;
    cfg.max_steps = 2;
    const auto r = train<float>(cfg, small_data());
    EXPECT_EQ(r.model.params().size(), base.model.params().size()) << flag;
    EXPECT_EQ(scalar_count(r.model), scalar_count(base.model)) << flag;
    for (const auto& l : r.log) EXPECT_TRUE(std::isfinite(l.total)) << flag;
  }
}

TEST(Train, LossDecreasesOnSmallCorpus) {
  auto cfg = small_train_config();
  cfg.max_steps = 60;
  cfg.adam.learning_rate = 3e-3;
  const auto r = train<float>(cfg, small_data());
  auto mean = [&](std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += r.log[i].total;
    return s / double(e - b);
  };
  EXPECT_LT(mean(50, 60), 0.7 * mean(0, 5));
}

TEST(Sweep, RejectsEmptyAndUnknown) {
  const auto cfg = small_train_config();
  EXPECT_THROW(sweep<float>(cfg, small_data(), "lambda", {}), ConfigError);
  EXPECT_THROW(sweep<float>(cfg, small_data(), "temperature", {1.0}), ConfigError);
  EXPECT_THROW(sweep<float>(cfg, small_data(), "K", {1.5}), ConfigError);
  EXPECT_THROW(sweep<float>(cfg, small_data(), "lambda", {1.5}), std::invalid_argument);
}

TEST(Sweep, OneRowPerValue) {
  auto cfg = small_train_config();
  cfg.max_steps = 2;
  const auto rows = sweep<float>(cfg, small_data(), "K", {1, 3});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].value, 3.0);
  std::ostringstream os;
  write_sweep_csv(os, rows);
  EXPECT_EQ(lines(os), 3u);
  EXPECT_EQ(with_sweep_value(cfg, "lambda", 0.3).loss.lambda_abs, 0.3);
}

TEST(Inspect, OneRowPerCode) {
  const auto r = train<float>(small_train_config(), small_data());
  std::ostringstream os;
  inspect_assignments(os, r.model, small_data().vocab, small_data().train, 2, 3);
  EXPECT_EQ(lines(os), 1u + 3u * 4u);
}
