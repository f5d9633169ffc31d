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

#include <stdexcept>
#include <vector>

#include "one2set/assignment.hpp"
#include "one2set/model.hpp"

namespace one2set {

enum class SetLossMode { kSeparate, kSingle };
enum class Forcing { kTeacher, kStudent };

struct LossConfig {
  double lambda_pre = 0.2;
  double lambda_abs = 0.1;
  SetLossMode mode = SetLossMode::kSeparate;
  Forcing forcing = Forcing::kTeacher;

  void validate() const {
    if (lambda_pre < 0.0 || lambda_pre > 1.0 || lambda_abs < 0.0 || lambda_abs > 1.0) {
      throw std::invalid_argument("loss config: scale factors must lie in [0, 1]");
    }
  }
};

struct SetLossTerms {
  Var total;
  Var present;  // codes [0, N/2); equals total in single mode
  Var absent;   // codes [N/2, N); invalid in single mode
  double null_ratio_present = 0.0;
  double null_ratio_absent = 0.0;
};

// Greedy continuation of each listed code for `lengths[i]` steps, fed with its
// own predictions. Forward-only.
template <typename T>
std::vector<std::vector<int>> greedy_tokens(const SetTransModel<T>& model, const Matrix<T>& memory,
                                            const Document& doc, const std::vector<std::size_t>& codes,
                                            const std::vector<std::size_t>& lengths) {
  std::vector<std::vector<int>> out(codes.size());
  std::size_t longest = 0;
  for (auto l : lengths) longest = std::max(longest, l);
  for (std::size_t t = 0; t < longest; ++t) {
    std::vector<std::size_t> active_codes;
    std::vector<std::vector<int>> prefixes;
    std::vector<std::size_t> slot;
    for (std::size_t i = 0; i < codes.size(); ++i) {
      if (out[i].size() >= lengths[i]) continue;
      active_codes.push_back(codes[i]);
      prefixes.push_back(out[i]);
      slot.push_back(i);
    }
    auto dists = model.decode_step(memory, doc, active_codes, prefixes);
    for (std::size_t k = 0; k < slot.size(); ++k) out[slot[k]].push_back(argmax<T>(dists[k]));
  }
  return out;
}

// -sum_n sum_t w_t log p(y^n_t) over the assigned target of every code,
// with w_t = lambda of the code's half when y_t is NULL and 1 otherwise.
// Teacher forcing feeds the target prefix; student forcing feeds the
// model's own greedy tokens instead.
template <typename T>
SetLossTerms set_loss(Tape<T>& t, const SetTransModel<T>& model, Var memory, const Document& doc,
                      const std::vector<KeyphraseTarget>& per_code, const LossConfig& cfg) {
  cfg.validate();
  const std::size_t n_codes = model.config().num_codes;
  if (per_code.size() != n_codes) throw std::invalid_argument("set_loss: one target per code required");
  const std::size_t half = n_codes / 2;

  using Request = typename SetTransModel<T>::DecodeRequest;
  std::vector<Request> requests(n_codes);
  std::vector<std::vector<int>> fed;
  if (cfg.forcing == Forcing::kStudent) {
    std::vector<std::size_t> codes(n_codes), lengths(n_codes);
    for (std::size_t n = 0; n < n_codes; ++n) {
      codes[n] = n;
      lengths[n] = per_code[n].ids.size() - 1;
    }
    fed = greedy_tokens(model, t.value(memory), doc, codes, lengths);
  }
  for (std::size_t n = 0; n < n_codes; ++n) {
    const auto& ids = per_code[n].ids;
    if (ids.empty()) throw std::invalid_argument("set_loss: empty target");
    requests[n].code = n;
    requests[n].inputs.push_back(kBosId);
    if (cfg.forcing == Forcing::kTeacher) {
      requests[n].inputs.insert(requests[n].inputs.end(), ids.begin(), ids.end() - 1);
    } else {
      requests[n].inputs.insert(requests[n].inputs.end(), fed[n].begin(), fed[n].end());
    }
  }
  auto dec = model.decode(t, memory, doc, requests);

  struct Part {
    std::vector<std::size_t> rows;
    std::vector<int> targets;
    std::vector<T> weights;
  };
  Part parts[2];
  std::size_t nulls[2] = {0, 0};
  for (std::size_t n = 0; n < n_codes; ++n) {
    const bool second = cfg.mode == SetLossMode::kSeparate && n >= half;
    const double lambda = second ? cfg.lambda_abs : cfg.lambda_pre;
    Part& part = parts[second ? 1 : 0];
    if (per_code[n].is_null) ++nulls[second ? 1 : 0];
    const auto& ids = per_code[n].ids;
    for (std::size_t p = 0; p < ids.size(); ++p) {
      part.rows.push_back(dec.offsets[n] + p);
      part.targets.push_back(ids[p]);
      part.weights.push_back(static_cast<T>(ids[p] == kNullId ? lambda : 1.0));
    }
  }

  SetLossTerms out;
  out.present = ops::weighted_nll(t, dec.probs, std::move(parts[0].rows), std::move(parts[0].targets),
                                  std::move(parts[0].weights));
  if (cfg.mode == SetLossMode::kSeparate) {
    out.absent = ops::weighted_nll(t, dec.probs, std::move(parts[1].rows), std::move(parts[1].targets),
                                   std::move(parts[1].weights));
    out.total = ops::add(t, out.present, out.absent);
    out.null_ratio_present = static_cast<double>(nulls[0]) / static_cast<double>(half);
    out.null_ratio_absent = static_cast<double>(nulls[1]) / static_cast<double>(n_codes - half);
  } else {
    out.total = out.present;
    out.null_ratio_present = static_cast<double>(nulls[0]) / static_cast<double>(n_codes);
  }
  return out;
}

// Token-level negative log-likelihood of a concatenated keyphrase sequence,
// decoded by a single stream on control code 0.
template <typename T>
Var one2seq_loss(Tape<T>& t, const SetTransModel<T>& model, Var memory, const Document& doc,
                 const std::vector<int>& sequence) {
  if (sequence.empty()) throw std::invalid_argument("one2seq_loss: empty sequence");
  typename SetTransModel<T>::DecodeRequest rq;
  rq.code = 0;
  rq.inputs.push_back(kBosId);
  rq.inputs.insert(rq.inputs.end(), sequence.begin(), sequence.end() - 1);
  std::vector<typename SetTransModel<T>::DecodeRequest> rqs{rq};
  auto dec = model.decode(t, memory, doc, rqs);
  std::vector<std::size_t> rows(sequence.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return ops::weighted_nll(t, dec.probs, std::move(rows), sequence,
                           std::vector<T>(sequence.size(), T(1)));
}

}  // namespace one2set
