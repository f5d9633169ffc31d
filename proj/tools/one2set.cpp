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

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "one2set/one2set.hpp"

namespace {

using namespace one2set;
using Scalar = float;

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  return os;
}

struct LoadedModel {
  SetTransModel<Scalar> model;
  Vocabulary vocab;
};

LoadedModel load_model(const std::string& ckpt, std::string vocab_path) {
  if (vocab_path.empty()) vocab_path = ckpt + ".vocab";
  auto loaded = load_checkpoint<Scalar>(ckpt);
  Vocabulary vocab = Vocabulary::load(vocab_path);
  if (vocab.hash() != loaded.vocab_hash) {
    throw CheckpointError("vocabulary " + vocab_path + " does not match checkpoint " + ckpt);
  }
  if (vocab.size() != loaded.model.config().vocab_size) throw CheckpointError("vocabulary size mismatch");
  return {std::move(loaded.model), std::move(vocab)};
}

std::vector<Example> load_examples(const std::string& path, const Vocabulary& vocab, bool title_sep) {
  PreprocessOptions opts;
  opts.title_separator = title_sep;
  return make_examples(prepare(read_jsonl(path), opts, false).samples, vocab);
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(config_detail::parse_double("--values", item));
  }
  if (out.empty()) throw ConfigError("--values: at least one value is required");
  return out;
}

TrainConfig load_config(const std::string& path, std::size_t threads) {
  TrainConfig cfg = TrainConfig::load(path);
  if (threads > 0) cfg.threads = threads;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keyphrase generation as set prediction"};
  app.require_subcommand(1);

  std::string config_path;
  std::size_t threads = 0;
  auto* train_cmd = app.add_subcommand("train", "train a model from a config file");
  train_cmd->add_option("--config", config_path, "key = value config file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--threads", threads, "worker threads (overrides the config)");

  std::string ckpt, input, output, vocab_path;
  std::size_t one2seq_len = 40;
  bool title_sep = false;
  auto* predict_cmd = app.add_subcommand("predict", "generate keyphrases for a JSONL corpus");
  predict_cmd->add_option("--ckpt", ckpt, "checkpoint")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--input", input, "input JSONL")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--output", output, "prediction JSONL")->required();
  predict_cmd->add_option("--vocab", vocab_path, "vocabulary file (default <ckpt>.vocab)");
  predict_cmd->add_option("--max-seq-len", one2seq_len, "length limit for single-stream models");
  predict_cmd->add_flag("--title-separator", title_sep, "insert <sep> between title and abstract");
  predict_cmd->add_option("--threads", threads, "worker threads");

  std::string pred_path, gold_path, csv_path, codes_csv;
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against gold keyphrases");
  eval_cmd->add_option("--pred", pred_path, "prediction JSONL")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--gold", gold_path, "gold JSONL")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--csv", csv_path, "write the report as CSV");
  eval_cmd->add_option("--codes-csv", codes_csv, "write per-code usage as CSV");
  eval_cmd->add_flag("--title-separator", title_sep, "insert <sep> between title and abstract");

  std::size_t limit = 20, steps = 2;
  bool single = false;
  auto* inspect_cmd = app.add_subcommand("inspect-assignment", "dump the code-to-target assignment");
  inspect_cmd->add_option("--ckpt", ckpt, "checkpoint")->required()->check(CLI::ExistingFile);
  inspect_cmd->add_option("--input", input, "input JSONL with keyphrases")->required()->check(CLI::ExistingFile);
  inspect_cmd->add_option("--output", output, "CSV output (default stdout)");
  inspect_cmd->add_option("--vocab", vocab_path, "vocabulary file (default <ckpt>.vocab)");
  inspect_cmd->add_option("--limit", limit, "number of documents");
  inspect_cmd->add_option("-K,--steps", steps, "rollout steps");
  inspect_cmd->add_flag("--single", single, "one joint matching instead of two halves");
  inspect_cmd->add_flag("--title-separator", title_sep, "insert <sep> between title and abstract");

  std::string param, values;
  auto* sweep_cmd = app.add_subcommand("sweep", "train one run per parameter value");
  sweep_cmd->add_option("--config", config_path, "base config")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--param", param, "lambda, lambda_pre, lambda_abs or K")->required();
  sweep_cmd->add_option("--values", values, "comma-separated values")->required();
  sweep_cmd->add_option("--output", output, "CSV output (default stdout)");
  sweep_cmd->add_option("--threads", threads, "worker threads (overrides the config)");

  std::string spec_path;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic JSONL corpus");
  synth_cmd->add_option("--spec", spec_path, "key = value spec file")->required()->check(CLI::ExistingFile);
  synth_cmd->add_option("--output", output, "output JSONL")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      const TrainConfig cfg = load_config(config_path, threads);
      auto res = run_training<Scalar>(cfg, &std::cerr);
      std::cout << "trained " << res.steps << " steps";
      if (res.best_score) std::cout << ", best validation score " << *res.best_score << " at step " << res.best_step;
      if (res.early_stopped) std::cout << " (early stop)";
      std::cout << "\ncheckpoint " << cfg.checkpoint_path << "\nvocabulary " << cfg.resolved_vocab_path() << '\n';
    } else if (*predict_cmd) {
      auto lm = load_model(ckpt, vocab_path);
      const auto examples = load_examples(input, lm.vocab, title_sep);
      std::vector<Document> docs;
      for (const auto& ex : examples) docs.push_back(ex.doc);
      PredictOptions opts;
      opts.one2seq_max_len = one2seq_len;
      opts.threads = resolve_threads(threads);
      auto os = open_out(output);
      for (const auto& r : predict_all(lm.model, lm.vocab, docs, opts)) os << to_json(r).dump() << '\n';
      std::cout << "wrote " << docs.size() << " predictions to " << output << '\n';
    } else if (*eval_cmd) {
      std::vector<PredictionRecord> preds;
      {
        std::ifstream is(pred_path);
        std::string line;
        while (std::getline(is, line))
          if (line.find_first_not_of(" \t\r") != std::string::npos)
            preds.push_back(prediction_from_json(nlohmann::json::parse(line)));
      }
      PreprocessOptions opts;
      opts.title_separator = title_sep;
      const auto gold_raw = prepare(read_jsonl(gold_path), opts, false);
      if (gold_raw.stats.rejected > 0) throw CorpusError("gold file contains documents with an empty source");
      std::vector<GoldRecord> golds;
      for (const auto& p : gold_raw.samples) golds.push_back(make_gold(p));
      std::vector<PredictionRecord> ordered(golds.size());
      std::vector<bool> seen(golds.size(), false);
      for (auto& p : preds) {
        if (p.id >= golds.size() || seen[p.id]) throw CorpusError("prediction id out of range or repeated");
        seen[p.id] = true;
        ordered[p.id] = std::move(p);
      }
      if (preds.size() != golds.size()) throw CorpusError("prediction and gold counts differ");
      const EvalReport rep = evaluate(ordered, golds);
      print_table(std::cout, rep);
      if (!csv_path.empty()) {
        auto os = open_out(csv_path);
        write_csv(os, rep);
      }
      if (!codes_csv.empty()) {
        auto os = open_out(codes_csv);
        write_code_usage_csv(os, rep);
      }
    } else if (*inspect_cmd) {
      auto lm = load_model(ckpt, vocab_path);
      const auto examples = load_examples(input, lm.vocab, title_sep);
      if (output.empty()) {
        inspect_assignments(std::cout, lm.model, lm.vocab, examples, steps, limit, single);
      } else {
        auto os = open_out(output);
        inspect_assignments(os, lm.model, lm.vocab, examples, steps, limit, single);
      }
    } else if (*sweep_cmd) {
      const TrainConfig cfg = load_config(config_path, threads);
      const auto vals = parse_values(values);
      const auto rows = sweep<Scalar>(cfg, load_training_data(cfg), param, vals, &std::cerr);
      if (output.empty()) {
        write_sweep_csv(std::cout, rows);
      } else {
        auto os = open_out(output);
        write_sweep_csv(os, rows);
      }
    } else if (*synth_cmd) {
      const SyntheticSpec spec = SyntheticSpec::from(KeyValueConfig::load(spec_path));
      const auto samples = generate_synthetic(spec);
      write_jsonl(output, samples);
      std::cout << "wrote " << samples.size() << " documents to " << output << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
