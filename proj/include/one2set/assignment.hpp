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

#include <algorithm>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "one2set/corpus.hpp"
#include "one2set/hungarian.hpp"
#include "one2set/model.hpp"

namespace one2set {

// Free-running predictions of every control code for a fixed number of steps.
template <typename T>
struct RolloutDistributions {
  // dists[code][step] is the distribution over the extended vocabulary.
  std::vector<std::vector<std::vector<T>>> dists;
  std::vector<std::vector<int>> tokens;

  std::size_t codes() const { return dists.size(); }
  std::size_t steps() const { return dists.empty() ? 0 : dists.front().size(); }
};

// Lowest id wins ties.
template <typename T>
int argmax(std::span<const T> p) {
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

template <typename T>
std::vector<std::size_t> all_codes(const SetTransModel<T>& model) {
  std::vector<std::size_t> codes(model.config().num_codes);
  std::iota(codes.begin(), codes.end(), std::size_t{0});
  return codes;
}

// Greedy self-feeding from BOS for exactly `steps` steps per code. Runs on
// a forward-only tape, so nothing here contributes gradients.
template <typename T>
RolloutDistributions<T> rollout(const SetTransModel<T>& model, const Matrix<T>& memory,
                                const Document& doc, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("rollout: K must be at least 1");
  const auto codes = all_codes(model);
  RolloutDistributions<T> r;
  r.dists.resize(codes.size());
  r.tokens.resize(codes.size());
  for (std::size_t t = 0; t < steps; ++t) {
    auto step = model.decode_step(memory, doc, codes, r.tokens);
    for (std::size_t n = 0; n < codes.size(); ++n) {
      r.tokens[n].push_back(argmax<T>(step[n]));
      r.dists[n].push_back(std::move(step[n]));
    }
  }
  return r;
}

template <typename T>
RolloutDistributions<T> rollout(const SetTransModel<T>& model, const Document& doc,
                                std::size_t steps) {
  return rollout(model, model.encode_value(doc), doc, steps);
}

// -sum_{t < min(|y|, K)} [y_t != NULL] p_t(y_t). |y| counts the EOS.
template <typename T>
double matching_cost(const KeyphraseTarget& target,
                     const std::vector<std::vector<T>>& code_dists) {
  const std::size_t s = std::min(target.ids.size(), code_dists.size());
  double cost = 0.0;
  for (std::size_t t = 0; t < s; ++t) {
    const int y = target.ids[t];
    if (y < 0 || static_cast<std::size_t>(y) >= code_dists[t].size()) {
      throw std::out_of_range("matching_cost: target id outside the extended vocabulary");
    }
    if (y == kNullId) continue;
    cost -= static_cast<double>(code_dists[t][static_cast<std::size_t>(y)]);
  }
  return cost;
}

// Rows are padded targets, columns the listed codes.
template <typename T>
Matrix<double> cost_matrix(const std::vector<KeyphraseTarget>& targets,
                           const RolloutDistributions<T>& roll,
                           std::span<const std::size_t> codes) {
  if (targets.size() != codes.size()) throw std::invalid_argument("cost_matrix: not square");
  Matrix<double> c(targets.size(), codes.size());
  for (std::size_t i = 0; i < targets.size(); ++i)
    for (std::size_t j = 0; j < codes.size(); ++j)
      c(i, j) = matching_cost(targets[i], roll.dists[codes[j]]);
  return c;
}

enum class AssignMode { kKStep, kFixed, kRandom };

struct HalfAssignment {
  std::vector<std::size_t> codes;              // codes of this half, ascending
  std::vector<KeyphraseTarget> padded;          // padded target list (rows)
  std::vector<std::size_t> target_of_code;      // index into padded, per code
  double cost = 0.0;
  std::size_t truncated = 0;
};

struct CodeAssignment {
  std::vector<KeyphraseTarget> per_code;  // exactly one target per code
  HalfAssignment present;                 // joint assignment in single mode
  HalfAssignment absent;                  // empty in single mode
};

namespace assignment_detail {

template <typename T>
HalfAssignment assign_half(const std::vector<KeyphraseTarget>& targets,
                           std::vector<std::size_t> codes,
                           const RolloutDistributions<T>* roll, AssignMode mode,
                           std::mt19937_64* rng) {
  HalfAssignment h;
  h.codes = std::move(codes);
  auto padded = pad_target_set(targets, h.codes.size());
  h.padded = std::move(padded.targets);
  h.truncated = padded.truncated;
  const std::size_t n = h.codes.size();
  h.target_of_code.resize(n);
  switch (mode) {
    case AssignMode::kKStep: {
      if (!roll) throw std::invalid_argument("K-step assignment needs a rollout");
      const Matrix<double> c = cost_matrix(h.padded, *roll, h.codes);
      const Assignment a = hungarian(c);
      h.target_of_code = a.row_of_col;
      h.cost = a.cost;
      return h;
    }
    case AssignMode::kFixed:
      std::iota(h.target_of_code.begin(), h.target_of_code.end(), std::size_t{0});
      break;
    case AssignMode::kRandom:
      if (!rng) throw std::invalid_argument("random assignment needs a generator");
      std::iota(h.target_of_code.begin(), h.target_of_code.end(), std::size_t{0});
      std::shuffle(h.target_of_code.begin(), h.target_of_code.end(), *rng);
      break;
  }
  if (roll) {
    for (std::size_t j = 0; j < n; ++j)
      h.cost += matching_cost(h.padded[h.target_of_code[j]], roll->dists[h.codes[j]]);
  }
  return h;
}

inline std::vector<std::size_t> code_range(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> v(end - begin);
  std::iota(v.begin(), v.end(), begin);
  return v;
}

// Present targets in first-occurrence order, as the sequential baseline sees them.
inline std::vector<KeyphraseTarget> by_position(std::vector<KeyphraseTarget> ts) {
  std::stable_sort(ts.begin(), ts.end(),
                   [](const auto& a, const auto& b) { return a.position < b.position; });
  return ts;
}

}  // namespace assignment_detail

// Codes [0, N/2) are matched against the present targets and codes
// [N/2, N) against the absent targets, independently.
template <typename T>
CodeAssignment assign_targets(const TargetSet& ts, const RolloutDistributions<T>* roll,
                              std::size_t num_codes, AssignMode mode = AssignMode::kKStep,
                              std::mt19937_64* rng = nullptr) {
  if (num_codes % 2 != 0) throw std::invalid_argument("assign_targets: N must be even");
  if (roll && roll->codes() != num_codes) {
    throw std::invalid_argument("assign_targets: rollout does not cover every code");
  }
  using namespace assignment_detail;
  const std::size_t half = num_codes / 2;
  const auto present = mode == AssignMode::kFixed ? by_position(ts.present) : ts.present;
  CodeAssignment out;
  out.present = assign_half(present, code_range(0, half), roll, mode, rng);
  out.absent = assign_half(ts.absent, code_range(half, num_codes), roll, mode, rng);
  out.per_code.resize(num_codes);
  for (const HalfAssignment* h : {&out.present, &out.absent})
    for (std::size_t j = 0; j < h->codes.size(); ++j)
      out.per_code[h->codes[j]] = h->padded[h->target_of_code[j]];
  return out;
}

// One joint matching of all N codes against present + absent targets.
template <typename T>
CodeAssignment assign_targets_single(const TargetSet& ts, const RolloutDistributions<T>* roll,
                                     std::size_t num_codes, AssignMode mode = AssignMode::kKStep,
                                     std::mt19937_64* rng = nullptr) {
  using namespace assignment_detail;
  std::vector<KeyphraseTarget> all =
      mode == AssignMode::kFixed ? by_position(ts.present) : ts.present;
  all.insert(all.end(), ts.absent.begin(), ts.absent.end());
  CodeAssignment out;
  out.present = assign_half(all, code_range(0, num_codes), roll, mode, rng);
  out.per_code.resize(num_codes);
  for (std::size_t j = 0; j < num_codes; ++j)
    out.per_code[j] = out.present.padded[out.present.target_of_code[j]];
  return out;
}

}  // namespace one2set
