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

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include "one2set/assignment.hpp"
#include "one2set/corpus.hpp"
#include "one2set/model.hpp"
#include "one2set/porter.hpp"

namespace one2set {

inline bool is_terminator(int id) { return id == kEosId || id == kNullId; }

// Greedy decoding of all N codes in lock-step. A code stops after emitting
// EOS or NULL, or after max_len tokens; the terminator is kept in its
// sequence. Finished codes drop out of the batch.
template <typename T>
std::vector<std::vector<int>> generate(const SetTransModel<T>& model, const Matrix<T>& memory,
                                       const Document& doc, std::size_t max_len) {
  if (max_len == 0) throw std::invalid_argument("generate: max_len must be positive");
  const std::size_t n = model.config().num_codes;
  std::vector<std::vector<int>> seqs(n);
  std::vector<bool> done(n, false);
  for (std::size_t t = 0; t < max_len; ++t) {
    std::vector<std::size_t> codes;
    std::vector<std::vector<int>> prefixes;
    for (std::size_t c = 0; c < n; ++c) {
      if (done[c]) continue;
      codes.push_back(c);
      prefixes.push_back(seqs[c]);
    }
    if (codes.empty()) break;
    auto dists = model.decode_step(memory, doc, codes, prefixes);
    for (std::size_t k = 0; k < codes.size(); ++k) {
      const int tok = argmax<T>(dists[k]);
      seqs[codes[k]].push_back(tok);
      if (is_terminator(tok)) done[codes[k]] = true;
    }
  }
  return seqs;
}

template <typename T>
std::vector<std::vector<int>> generate(const SetTransModel<T>& model, const Document& doc,
                                       std::size_t max_len) {
  return generate(model, model.encode_value(doc), doc, max_len);
}

// Reference path: each code decoded on its own.
template <typename T>
std::vector<std::vector<int>> generate_sequential(const SetTransModel<T>& model,
                                                  const Matrix<T>& memory, const Document& doc,
                                                  std::size_t max_len) {
  const std::size_t n = model.config().num_codes;
  std::vector<std::vector<int>> seqs(n);
  for (std::size_t c = 0; c < n; ++c) {
    const std::vector<std::size_t> code{c};
    for (std::size_t t = 0; t < max_len; ++t) {
      auto dists = model.decode_step(memory, doc, code, {seqs[c]});
      const int tok = argmax<T>(dists[0]);
      seqs[c].push_back(tok);
      if (is_terminator(tok)) break;
    }
  }
  return seqs;
}

// Single-stream greedy decoding of a <sep>-joined sequence on code 0.
template <typename T>
std::vector<int> generate_one2seq(const SetTransModel<T>& model, const Matrix<T>& memory,
                                  const Document& doc, std::size_t max_len) {
  std::vector<int> seq;
  const std::vector<std::size_t> code{0};
  for (std::size_t t = 0; t < max_len; ++t) {
    auto dists = model.decode_step(memory, doc, code, {seq});
    const int tok = argmax<T>(dists[0]);
    seq.push_back(tok);
    if (tok == kEosId) break;
  }
  return seq;
}

struct AssembledPrediction {
  std::vector<Tokens> phrases;    // stem-deduplicated, code order
  std::vector<Tokens> per_code;   // one entry per code; empty for NULL
  std::size_t raw_count = 0;      // non-empty phrases before deduplication
  std::size_t dup_count = 0;
};

// Surface tokens of one code's output; empty if NULL appears anywhere.
inline Tokens phrase_tokens(const std::vector<int>& seq, const Document& doc, const Vocabulary& vocab) {
  Tokens out;
  for (int id : seq) {
    if (id == kNullId) return {};
    if (id == kEosId) break;
    if (id == kSepId || id == kBosId || id == kPadId) continue;
    out.push_back(surface(id, doc, vocab));
  }
  return out;
}

inline AssembledPrediction assemble_phrases(std::vector<Tokens> per_code) {
  AssembledPrediction a;
  std::set<Tokens> seen;
  for (const auto& ph : per_code) {
    if (ph.empty()) continue;
    ++a.raw_count;
    if (!seen.insert(stem_all(ph)).second) {
      ++a.dup_count;
      continue;
    }
    a.phrases.push_back(ph);
  }
  a.per_code = std::move(per_code);
  return a;
}

inline AssembledPrediction assemble(const std::vector<std::vector<int>>& sequences, const Document& doc,
                                    const Vocabulary& vocab) {
  std::vector<Tokens> per_code;
  per_code.reserve(sequences.size());
  for (const auto& s : sequences) per_code.push_back(phrase_tokens(s, doc, vocab));
  return assemble_phrases(std::move(per_code));
}

// Splits a <sep>-joined sequence into phrases.
inline AssembledPrediction assemble_one2seq(const std::vector<int>& seq, const Document& doc,
                                            const Vocabulary& vocab) {
  std::vector<Tokens> phrases(1);
  for (int id : seq) {
    if (id == kEosId) break;
    if (id == kSepId) {
      phrases.emplace_back();
      continue;
    }
    if (id == kNullId || id == kBosId || id == kPadId) continue;
    phrases.back().push_back(surface(id, doc, vocab));
  }
  auto a = assemble_phrases(std::move(phrases));
  a.per_code.clear();
  return a;
}

struct PredictionRecord {
  std::size_t id = 0;
  std::vector<std::string> present_pred;
  std::vector<std::string> absent_pred;
  std::size_t raw_count = 0;
  std::size_t dup_count = 0;
  std::vector<std::string> code_outputs;  // per code, "" for NULL
};

inline bool is_present_in(const Tokens& stemmed_source, const Tokens& phrase) {
  return find_subsequence(stemmed_source, stem_all(phrase)) >= 0;
}

inline PredictionRecord make_record(std::size_t id, const Document& doc, const AssembledPrediction& a) {
  PredictionRecord r;
  r.id = id;
  const Tokens stemmed = stem_all(doc.tokens);
  for (const auto& ph : a.phrases) {
    (is_present_in(stemmed, ph) ? r.present_pred : r.absent_pred).push_back(join(ph));
  }
  r.raw_count = a.raw_count;
  r.dup_count = a.dup_count;
  for (const auto& ph : a.per_code) r.code_outputs.push_back(join(ph));
  return r;
}

inline nlohmann::json to_json(const PredictionRecord& r) {
  nlohmann::json j{{"id", r.id},
                   {"present_pred", r.present_pred},
                   {"absent_pred", r.absent_pred},
                   {"raw_count", r.raw_count},
                   {"dup_count", r.dup_count}};
  if (!r.code_outputs.empty()) j["code_outputs"] = r.code_outputs;
  return j;
}

inline PredictionRecord prediction_from_json(const nlohmann::json& j) {
  PredictionRecord r;
  r.id = j.at("id").get<std::size_t>();
  r.present_pred = j.at("present_pred").get<std::vector<std::string>>();
  r.absent_pred = j.at("absent_pred").get<std::vector<std::string>>();
  r.raw_count = j.value("raw_count", std::size_t{0});
  r.dup_count = j.value("dup_count", std::size_t{0});
  if (j.contains("code_outputs")) r.code_outputs = j.at("code_outputs").get<std::vector<std::string>>();
  return r;
}

}  // namespace one2set
