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

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "one2set/assignment.hpp"
#include "one2set/checkpoint.hpp"
#include "one2set/config.hpp"
#include "one2set/corpus.hpp"
#include "one2set/decoding.hpp"
#include "one2set/evaluation.hpp"
#include "one2set/loss.hpp"
#include "one2set/model.hpp"
#include "one2set/optimizer.hpp"

namespace one2set {

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0, std::uint64_t d = 0) {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  };
  return splitmix(splitmix(splitmix(splitmix(a) ^ b) ^ c) ^ d);
}

// Runs fn(worker, item) over [0, items) with contiguous per-worker chunks.
template <typename Fn>
void parallel_chunks(std::size_t workers, std::size_t items, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, items));
  if (workers == 1) {
    for (std::size_t i = 0; i < items; ++i) fn(std::size_t{0}, i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t per = (items + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w * per; i < std::min(items, (w + 1) * per); ++i) fn(w, i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct TrainingData {
  Vocabulary vocab;
  std::vector<Example> train;
  std::vector<Example> valid;
  CorpusStats train_stats;
};

inline TrainingData build_training_data(const TrainConfig& cfg, const std::vector<RawSample>& train,
                                        const std::vector<RawSample>& valid = {}) {
  PreprocessOptions opts;
  opts.title_separator = cfg.title_separator;
  TrainingData d;
  auto tr = prepare(train, opts);
  if (tr.samples.empty()) throw CorpusError("training corpus is empty");
  d.train_stats = tr.stats;
  d.vocab = build_vocabulary(tr.samples, cfg.vocab_cap);
  d.train = make_examples(tr.samples, d.vocab);
  if (!valid.empty()) d.valid = make_examples(prepare(valid, opts, false).samples, d.vocab);
  return d;
}

inline TrainingData load_training_data(const TrainConfig& cfg) {
  if (cfg.train_path.empty()) throw ConfigError("config key 'train' is required");
  std::vector<RawSample> valid;
  if (!cfg.valid_path.empty()) valid = read_jsonl(cfg.valid_path);
  return build_training_data(cfg, read_jsonl(cfg.train_path), valid);
}

struct ExampleLoss {
  double total = 0.0;
  double present = 0.0;
  double absent = 0.0;
  double null_ratio_present = 0.0;
  double null_ratio_absent = 0.0;
};

// Forward and backward pass for one example; gradients are added into `sink`.
template <typename T>
ExampleLoss example_gradients(const TrainConfig& cfg, const SetTransModel<T>& model, const Example& ex,
                              std::uint64_t seed, Gradients<T>& sink) {
  Tape<T> t(model.params(), &sink);
  t.set_training(model.config().dropout > 0.0, mix_seed(seed, 1));
  const Var memory = model.encode(t, ex.doc);
  ExampleLoss out;
  if (model.config().one2seq) {
    const Var loss = one2seq_loss(t, model, memory, ex.doc, build_one2seq_target(ex.targets));
    out.total = out.present = static_cast<double>(t.value(loss)(0, 0));
    if (std::isfinite(out.total)) t.backward(loss);
    return out;
  }
  const AssignMode mode = cfg.assign_mode();
  std::optional<RolloutDistributions<T>> roll;
  if (mode == AssignMode::kKStep) {
    roll = rollout(model, t.value(memory), ex.doc, cfg.assign_steps);
    for (const auto& code : roll->dists)
      for (const auto& d : code)
        for (T p : d)
          if (!std::isfinite(p)) {
            out.total = out.present = out.absent = std::numeric_limits<double>::quiet_NaN();
            return out;
          }
  }
  std::mt19937_64 rng(mix_seed(seed, 2));
  const std::size_t n = model.config().num_codes;
  const RolloutDistributions<T>* rp = roll ? &*roll : nullptr;
  const CodeAssignment a = cfg.ablations.single_set_loss ? assign_targets_single(ex.targets, rp, n, mode, &rng)
                                                         : assign_targets(ex.targets, rp, n, mode, &rng);
  const SetLossTerms terms = set_loss(t, model, memory, ex.doc, a.per_code, cfg.effective_loss());
  out.total = static_cast<double>(t.value(terms.total)(0, 0));
  out.present = static_cast<double>(t.value(terms.present)(0, 0));
  out.absent = terms.absent.valid() ? static_cast<double>(t.value(terms.absent)(0, 0)) : 0.0;
  out.null_ratio_present = terms.null_ratio_present;
  out.null_ratio_absent = terms.null_ratio_absent;
  if (std::isfinite(out.total)) t.backward(terms.total);
  return out;
}

struct PredictOptions {
  std::size_t one2seq_max_len = 40;
  std::size_t threads = 1;
};

template <typename T>
PredictionRecord predict_document(const SetTransModel<T>& model, const Vocabulary& vocab, const Document& doc,
                                  std::size_t id, const PredictOptions& opts = {}) {
  const Matrix<T> memory = model.encode_value(doc);
  if (model.config().one2seq) {
    return make_record(id, doc, assemble_one2seq(generate_one2seq(model, memory, doc, opts.one2seq_max_len), doc, vocab));
  }
  return make_record(id, doc, assemble(generate(model, memory, doc, model.config().max_phrase_len), doc, vocab));
}

template <typename T>
std::vector<PredictionRecord> predict_all(const SetTransModel<T>& model, const Vocabulary& vocab,
                                          const std::vector<Document>& docs, const PredictOptions& opts = {}) {
  std::vector<PredictionRecord> out(docs.size());
  parallel_chunks(opts.threads, docs.size(), [&](std::size_t, std::size_t i) {
    out[i] = predict_document(model, vocab, docs[i], i, opts);
  });
  return out;
}

template <typename T>
EvalReport evaluate_model(const SetTransModel<T>& model, const Vocabulary& vocab, const std::vector<Example>& data,
                          const PredictOptions& opts = {}) {
  std::vector<Document> docs;
  std::vector<GoldRecord> golds;
  for (const auto& ex : data) {
    docs.push_back(ex.doc);
    golds.push_back(make_gold(ex));
  }
  return evaluate(predict_all(model, vocab, docs, opts), golds);
}

struct StepLog {
  std::size_t step = 0;
  double total = 0.0;
  double present = 0.0;
  double absent = 0.0;
  double null_ratio_present = 0.0;
  double null_ratio_absent = 0.0;
  std::optional<double> valid_score;  // present F1@M + absent F1@M
};

inline void write_log_header(std::ostream& os) {
  os << "step,loss,present_loss,absent_loss,null_ratio_present,null_ratio_absent,valid_score\n";
}

inline void write_log_row(std::ostream& os, const StepLog& r) {
  os << r.step << ',' << std::setprecision(9) << r.total << ',' << r.present << ',' << r.absent << ','
     << r.null_ratio_present << ',' << r.null_ratio_absent << ',';
  if (r.valid_score) os << *r.valid_score;
  os << '\n';
}

template <typename T>
struct TrainResult {
  SetTransModel<T> model;  // best validation checkpoint, else the final one
  std::vector<StepLog> log;
  std::size_t steps = 0;
  std::size_t best_step = 0;
  std::optional<double> best_score;
  bool early_stopped = false;
};

inline double selection_score(const EvalReport& r) { return r.present.f1_at_m + r.absent.f1_at_m; }

template <typename T>
TrainResult<T> train(const TrainConfig& cfg, const TrainingData& data, std::ostream* csv = nullptr,
                     std::ostream* progress = nullptr) {
  cfg.validate();
  if (data.train.empty()) throw CorpusError("training corpus is empty");
  const ModelConfig mcfg = cfg.effective_model(data.vocab.size());
  SetTransModel<T> model(mcfg, cfg.seed);
  Adam<T> adam(model.params(), cfg.adam);
  const std::size_t workers = std::min(resolve_threads(cfg.threads), cfg.batch_size);
  std::vector<Gradients<T>> grads(workers, Gradients<T>(model.params()));
  PredictOptions popts;
  popts.one2seq_max_len = cfg.one2seq_max_len;
  popts.threads = workers;

  std::mt19937_64 order_rng(mix_seed(cfg.seed, 0x5eed));
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), order_rng);
  std::size_t cursor = 0;

  TrainResult<T> res{model, {}, 0, 0, std::nullopt, false};
  std::size_t stale = 0;
  if (csv) write_log_header(*csv);
  std::vector<ExampleLoss> losses(cfg.batch_size);
  std::vector<std::size_t> batch(cfg.batch_size);

  for (std::size_t step = 1; step <= cfg.max_steps; ++step) {
    for (auto& b : batch) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), order_rng);
        cursor = 0;
      }
      b = order[cursor++];
    }
    for (auto& g : grads) g.zero();
    parallel_chunks(workers, batch.size(), [&](std::size_t w, std::size_t i) {
      losses[i] = example_gradients(cfg, model, data.train[batch[i]], mix_seed(cfg.seed, step, i), grads[w]);
    });
    StepLog row;
    row.step = step;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto& l = losses[i];
      if (!std::isfinite(l.total)) {
        std::ostringstream msg;
        msg << "training diverged at step " << step << ": example " << batch[i] << " loss=" << l.total
            << " present=" << l.present << " absent=" << l.absent;
        throw TrainingDiverged(msg.str());
      }
      row.total += l.total;
      row.present += l.present;
      row.absent += l.absent;
      row.null_ratio_present += l.null_ratio_present;
      row.null_ratio_absent += l.null_ratio_absent;
    }
    const double nb = static_cast<double>(batch.size());
    row.total /= nb;
    row.present /= nb;
    row.absent /= nb;
    row.null_ratio_present /= nb;
    row.null_ratio_absent /= nb;
    for (std::size_t w = 1; w < workers; ++w) grads[0].accumulate(grads[w]);
    grads[0].scale(static_cast<T>(1.0 / nb));
    const double gnorm = global_norm(grads[0]);
    if (!std::isfinite(gnorm)) {
      throw TrainingDiverged("training diverged at step " + std::to_string(step) + ": non-finite gradient");
    }
    adam.step(model.params(), grads[0]);
    res.steps = step;

    const bool last = step == cfg.max_steps;
    const bool eval_now = !data.valid.empty() && ((cfg.eval_every > 0 && step % cfg.eval_every == 0) || last);
    if (eval_now) {
      const double score = selection_score(evaluate_model(model, data.vocab, data.valid, popts));
      row.valid_score = score;
      if (!res.best_score || score > *res.best_score) {
        res.best_score = score;
        res.best_step = step;
        res.model = model;
        stale = 0;
      } else {
        ++stale;
      }
    }
    if (csv) write_log_row(*csv, row);
    if (progress && (step % 50 == 0 || step == 1 || last || row.valid_score)) {
      *progress << "step " << step << " loss " << row.total;
      if (row.valid_score) *progress << " valid " << *row.valid_score;
      *progress << '\n';
    }
    res.log.push_back(row);
    if (cfg.patience > 0 && stale >= cfg.patience) {
      res.early_stopped = true;
      break;
    }
  }
  if (!res.best_score) {
    res.model = model;
    res.best_step = res.steps;
  }
  return res;
}

// Loads the corpus named by the config, trains, and writes the checkpoint,
// the vocabulary and (if configured) the CSV log.
template <typename T>
TrainResult<T> run_training(const TrainConfig& cfg, std::ostream* progress = nullptr) {
  const TrainingData data = load_training_data(cfg);
  std::ofstream log;
  if (!cfg.log_path.empty()) {
    log.open(cfg.log_path);
    if (!log) throw std::runtime_error("cannot write log: " + cfg.log_path);
  }
  auto res = train<T>(cfg, data, log.is_open() ? &log : nullptr, progress);
  save_checkpoint(cfg.checkpoint_path, res.model, data.vocab.hash());
  data.vocab.save(cfg.resolved_vocab_path());
  return res;
}

struct SweepRow {
  std::string param;
  double value = 0.0;
  EvalReport report;
  std::size_t steps = 0;

  double avg_predictions() const { return report.avg_present_preds + report.avg_absent_preds; }
};

inline TrainConfig with_sweep_value(TrainConfig cfg, const std::string& param, double v) {
  if (param == "lambda") {
    cfg.loss.lambda_pre = cfg.loss.lambda_abs = v;
  } else if (param == "lambda_pre") {
    cfg.loss.lambda_pre = v;
  } else if (param == "lambda_abs") {
    cfg.loss.lambda_abs = v;
  } else if (param == "K") {
    if (v < 1.0 || v != std::floor(v)) throw ConfigError("sweep: K values must be positive integers");
    cfg.assign_steps = static_cast<std::size_t>(v);
  } else {
    throw ConfigError("sweep: unknown parameter '" + param + "' (expected lambda, lambda_pre, lambda_abs or K)");
  }
  cfg.validate();
  return cfg;
}

// One training run per value; metrics are taken on the validation split when
// present, else on the training split.
template <typename T>
std::vector<SweepRow> sweep(const TrainConfig& base, const TrainingData& data, const std::string& param,
                            const std::vector<double>& values, std::ostream* progress = nullptr) {
  if (values.empty()) throw ConfigError("sweep: no values given");
  std::vector<TrainConfig> cfgs;
  for (double v : values) cfgs.push_back(with_sweep_value(base, param, v));
  std::vector<SweepRow> rows;
  PredictOptions popts;
  popts.one2seq_max_len = base.one2seq_max_len;
  popts.threads = resolve_threads(base.threads);
  const auto& eval_set = data.valid.empty() ? data.train : data.valid;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (progress) *progress << "sweep " << param << "=" << values[i] << '\n';
    auto res = train<T>(cfgs[i], data);
    SweepRow r;
    r.param = param;
    r.value = values[i];
    r.steps = res.steps;
    r.report = evaluate_model(res.model, data.vocab, eval_set, popts);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "param,value,present_f1_at_5,present_f1_at_m,absent_f1_at_5,absent_f1_at_m,avg_present_preds,"
        "avg_absent_preds,avg_predictions,dup_ratio,steps\n";
  for (const auto& r : rows) {
    const auto& e = r.report;
    os << r.param << ',' << r.value << ',' << e.present.f1_at_5 << ',' << e.present.f1_at_m << ','
       << e.absent.f1_at_5 << ',' << e.absent.f1_at_m << ',' << e.avg_present_preds << ',' << e.avg_absent_preds
       << ',' << r.avg_predictions() << ',' << e.dup_ratio << ',' << r.steps << '\n';
  }
}

// Per-code assignment under the current parameters, one row per (doc, code).
template <typename T>
void inspect_assignments(std::ostream& os, const SetTransModel<T>& model, const Vocabulary& vocab,
                         const std::vector<Example>& data, std::size_t steps, std::size_t limit,
                         bool single = false) {
  (void)vocab;
  os << "doc,code,half,target,cost\n";
  const std::size_t n = model.config().num_codes;
  for (std::size_t d = 0; d < data.size() && d < limit; ++d) {
    const auto& ex = data[d];
    const auto roll = rollout(model, ex.doc, steps);
    const CodeAssignment a = single ? assign_targets_single<T>(ex.targets, &roll, n)
                                    : assign_targets<T>(ex.targets, &roll, n);
    for (std::size_t c = 0; c < n; ++c) {
      const auto& tgt = a.per_code[c];
      const char* half = single ? "all" : (c < n / 2 ? "present" : "absent");
      std::string text = tgt.is_null ? "<null>" : join(tgt.words);
      os << d << ',' << c + 1 << ',' << half << ",\"" << text << "\"," << matching_cost(tgt, roll.dists[c]) << '\n';
    }
  }
}

}  // namespace one2set
