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

// Synthetic keyphrase corpora.
//
// The word list is split into four disjoint pools: filler words, words that
// only appear inside present phrases, trigger words, and words that only
// appear inside absent phrases. Each absent phrase has a dedicated trigger;
// a document lists that absent phrase iff it contains the trigger. Present
// phrases are drawn from a fixed inventory and planted contiguously.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "one2set/config.hpp"
#include "one2set/corpus.hpp"
#include "one2set/porter.hpp"

namespace one2set {

struct SyntheticSpec {
  std::size_t vocab_size = 200;
  std::size_t documents = 200;
  std::size_t min_doc_len = 15;
  std::size_t max_doc_len = 30;
  std::size_t min_phrases = 2;
  std::size_t max_phrases = 5;
  double absent_ratio = 0.4;  // share of each document's phrases that are absent
  std::size_t title_len = 4;
  std::uint64_t seed = 7;

  void validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("synthetic spec: " + m); };
    if (vocab_size < 60) fail("vocab_size must be at least 60");
    if (min_phrases == 0 || min_phrases > max_phrases) fail("phrase range is empty");
    if (min_doc_len == 0 || min_doc_len > max_doc_len) fail("document length range is empty");
    if (absent_ratio < 0.0 || absent_ratio > 1.0) fail("absent_ratio must lie in [0, 1]");
    if (max_doc_len < 3 * max_phrases) fail("max_doc_len too small for the phrase count");
  }

  static SyntheticSpec from(const KeyValueConfig& kv) {
    SyntheticSpec s;
    config_detail::Binder b;
    b.uint("vocab_size", s.vocab_size)
        .uint("documents", s.documents)
        .uint("min_doc_len", s.min_doc_len)
        .uint("max_doc_len", s.max_doc_len)
        .uint("min_phrases", s.min_phrases)
        .uint("max_phrases", s.max_phrases)
        .real("absent_ratio", s.absent_ratio)
        .uint("title_len", s.title_len)
        .uint("seed", s.seed);
    b.apply(kv);
    s.validate();
    return s;
  }
};

struct SyntheticWorld {
  std::vector<std::string> filler;
  std::vector<Tokens> present_inventory;
  std::vector<std::string> triggers;     // triggers[i] selects absent_inventory[i]
  std::vector<Tokens> absent_inventory;
};

namespace synthetic_detail {

// Distinct lowercase pseudo-words that are their own Porter stem.
inline std::vector<std::string> make_words(std::size_t n, std::mt19937_64& rng) {
  static const std::string cons = "bdfgklmnprtvz";
  static const std::string vows = "aiou";
  std::vector<std::string> out;
  std::uniform_int_distribution<std::size_t> syl(2, 3);
  std::uniform_int_distribution<std::size_t> ci(0, cons.size() - 1), vi(0, vows.size() - 1);
  std::set<std::string> stems;
  while (out.size() < n) {
    std::string w;
    for (std::size_t s = syl(rng); s > 0; --s) {
      w += cons[ci(rng)];
      w += vows[vi(rng)];
    }
    if (porter_stem(w) != w || !stems.insert(w).second) continue;
    out.push_back(w);
  }
  return out;
}

// Partitions `pool` into exactly `count` phrases of 1..max_words words each,
// so no word is shared between phrases.
inline std::vector<Tokens> make_phrases(const std::vector<std::string>& pool, std::size_t count,
                                        std::size_t max_words, std::mt19937_64& rng) {
  if (count == 0 || count > pool.size() || pool.size() > count * max_words) {
    throw std::invalid_argument("synthetic: cannot partition word pool");
  }
  std::vector<std::size_t> lens(count, 1);
  std::uniform_int_distribution<std::size_t> pick(0, count - 1);
  for (std::size_t extra = pool.size() - count; extra > 0;) {
    auto& l = lens[pick(rng)];
    if (l < max_words) {
      ++l;
      --extra;
    }
  }
  std::vector<Tokens> out;
  std::size_t at = 0;
  for (auto l : lens) {
    out.emplace_back(pool.begin() + static_cast<long>(at), pool.begin() + static_cast<long>(at + l));
    at += l;
  }
  return out;
}

}  // namespace synthetic_detail

inline SyntheticWorld make_world(const SyntheticSpec& spec, std::mt19937_64& rng) {
  const std::size_t v = spec.vocab_size;
  const auto words = synthetic_detail::make_words(v, rng);
  const std::size_t n_present = (3 * v) / 10;  // present-phrase words
  const std::size_t n_trig = v / 10;
  const std::size_t n_absent = (3 * v) / 20;    // absent-phrase words
  auto at = [&](std::size_t b, std::size_t e) {
    return std::vector<std::string>(words.begin() + static_cast<long>(b), words.begin() + static_cast<long>(e));
  };
  SyntheticWorld w;
  const auto present_words = at(0, n_present);
  w.triggers = at(n_present, n_present + n_trig);
  const auto absent_words = at(n_present + n_trig, n_present + n_trig + n_absent);
  w.filler = at(n_present + n_trig + n_absent, v);
  w.present_inventory = synthetic_detail::make_phrases(present_words, n_present / 2, 3, rng);
  w.absent_inventory = synthetic_detail::make_phrases(absent_words, n_trig, 2, rng);
  return w;
}

inline std::vector<RawSample> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const SyntheticWorld w = make_world(spec, rng);
  using Dist = std::uniform_int_distribution<std::size_t>;
  std::vector<RawSample> out;
  out.reserve(spec.documents);
  for (std::size_t d = 0; d < spec.documents; ++d) {
    const std::size_t k = Dist(spec.min_phrases, spec.max_phrases)(rng);
    std::size_t n_abs = 0;
    if (spec.absent_ratio > 0.0) {
      n_abs = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(spec.absent_ratio * double(k))), 1, k);
      if (spec.absent_ratio < 1.0 && n_abs == k && k > 1) --n_abs;
    }
    const std::size_t n_pre = k - n_abs;

    std::vector<std::size_t> pre_idx(w.present_inventory.size()), abs_idx(w.absent_inventory.size());
    std::iota(pre_idx.begin(), pre_idx.end(), std::size_t{0});
    std::iota(abs_idx.begin(), abs_idx.end(), std::size_t{0});
    std::shuffle(pre_idx.begin(), pre_idx.end(), rng);
    std::shuffle(abs_idx.begin(), abs_idx.end(), rng);
    pre_idx.resize(n_pre);
    abs_idx.resize(n_abs);

    // Units are placed in random order between filler runs.
    std::vector<Tokens> units;
    std::size_t planted = 0;
    for (auto i : pre_idx) {
      units.push_back(w.present_inventory[i]);
      planted += units.back().size();
    }
    for (auto i : abs_idx) {
      units.push_back({w.triggers[i]});
      ++planted;
    }
    std::shuffle(units.begin(), units.end(), rng);
    const std::size_t len = std::max(Dist(spec.min_doc_len, spec.max_doc_len)(rng), planted + units.size());
    std::size_t n_fill = len - planted;
    // Every unit is followed by at least one filler word so phrases never touch.
    std::vector<std::size_t> gaps(units.size() + 1, 0);
    for (std::size_t u = 1; u < gaps.size(); ++u) gaps[u] = 1;
    n_fill -= units.size();
    Dist gap_pick(0, gaps.size() - 1);
    for (std::size_t f = 0; f < n_fill; ++f) ++gaps[gap_pick(rng)];
    Dist filler_pick(0, w.filler.size() - 1);
    Tokens doc;
    for (std::size_t u = 0; u <= units.size(); ++u) {
      for (std::size_t g = 0; g < gaps[u]; ++g) doc.push_back(w.filler[filler_pick(rng)]);
      if (u < units.size()) doc.insert(doc.end(), units[u].begin(), units[u].end());
    }

    std::vector<Tokens> phrases;
    for (auto i : pre_idx) phrases.push_back(w.present_inventory[i]);
    for (auto i : abs_idx) phrases.push_back(w.absent_inventory[i]);
    std::shuffle(phrases.begin(), phrases.end(), rng);

    const Tokens stemmed = stem_all(doc);
    for (auto i : pre_idx)
      if (find_subsequence(stemmed, stem_all(w.present_inventory[i])) < 0)
        throw std::logic_error("synthetic: planted phrase not found");
    for (auto i : abs_idx)
      if (find_subsequence(stemmed, stem_all(w.absent_inventory[i])) >= 0)
        throw std::logic_error("synthetic: absent phrase occurs in the document");

    const std::size_t title_len = std::min(spec.title_len, doc.size() - 1);
    RawSample s;
    s.title = join(Tokens(doc.begin(), doc.begin() + static_cast<long>(title_len)));
    s.abstract = join(Tokens(doc.begin() + static_cast<long>(title_len), doc.end()));
    for (const auto& p : phrases) s.keyphrases.push_back(join(p));
    out.push_back(std::move(s));
  }
  return out;
}

inline void write_jsonl(std::ostream& os, const std::vector<RawSample>& samples) {
  for (const auto& s : samples) os << to_json(s).dump() << '\n';
}

inline void write_jsonl(const std::string& path, const std::vector<RawSample>& samples) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_jsonl(os, samples);
}

}  // namespace one2set
