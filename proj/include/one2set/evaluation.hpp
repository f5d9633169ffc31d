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

#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "one2set/corpus.hpp"
#include "one2set/decoding.hpp"
#include "one2set/porter.hpp"

namespace one2set {

// Two phrases are identical iff their stemmed token sequences are equal.
inline bool match(const Tokens& pred, const Tokens& gold) {
  return pred.size() == gold.size() && stem_all(pred) == stem_all(gold);
}

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

namespace evaluation_detail {

// Greedy one-to-one matching; placeholder entries (nullopt) never match.
inline std::size_t count_matches(const std::vector<std::optional<Tokens>>& preds,
                                 const std::vector<Tokens>& golds) {
  std::vector<Tokens> gold_stems;
  for (const auto& g : golds) gold_stems.push_back(stem_all(g));
  std::vector<bool> used(golds.size(), false);
  std::size_t matched = 0;
  for (const auto& p : preds) {
    if (!p) continue;
    const Tokens ps = stem_all(*p);
    for (std::size_t g = 0; g < gold_stems.size(); ++g) {
      if (!used[g] && gold_stems[g] == ps) {
        used[g] = true;
        ++matched;
        break;
      }
    }
  }
  return matched;
}

inline Prf score(const std::vector<std::optional<Tokens>>& preds, const std::vector<Tokens>& golds) {
  if (preds.empty()) return {};
  const auto m = static_cast<double>(count_matches(preds, golds));
  Prf r;
  r.precision = m / static_cast<double>(preds.size());
  r.recall = m / static_cast<double>(golds.size());
  r.f1 = harmonic(r.precision, r.recall);
  return r;
}

}  // namespace evaluation_detail

// F1 over every prediction. nullopt when there is no gold phrase.
inline std::optional<Prf> f1_at_m(const std::vector<Tokens>& preds, const std::vector<Tokens>& golds) {
  if (golds.empty()) return std::nullopt;
  std::vector<std::optional<Tokens>> p(preds.begin(), preds.end());
  return evaluation_detail::score(p, golds);
}

// F1 over exactly `k` predictions: longer lists are cut, shorter ones are
// filled with phrases that can never match. With `pad` off, short lists are
// scored as they are. The generator is accepted for interface fidelity; the
// placeholders are unmatchable so it never affects the score.
inline std::optional<Prf> f1_at_k(const std::vector<Tokens>& preds, const std::vector<Tokens>& golds,
                                  std::mt19937_64* rng = nullptr, bool pad = true, std::size_t k = 5) {
  (void)rng;
  if (golds.empty()) return std::nullopt;
  std::vector<std::optional<Tokens>> p;
  for (std::size_t i = 0; i < preds.size() && i < k; ++i) p.emplace_back(preds[i]);
  if (pad) {
    while (p.size() < k) p.emplace_back(std::nullopt);
  }
  return evaluation_detail::score(p, golds);
}

inline std::optional<Prf> f1_at_5(const std::vector<Tokens>& preds, const std::vector<Tokens>& golds,
                                  std::mt19937_64* rng = nullptr, bool pad = true) {
  return f1_at_k(preds, golds, rng, pad, 5);
}

struct CodeUsage {
  double present = 0.0;
  double absent = 0.0;
  double null = 0.0;
};

struct CategoryScores {
  double f1_at_5 = 0.0;
  double f1_at_m = 0.0;
  double p_at_m = 0.0;
  double r_at_m = 0.0;
  std::size_t scored = 0;   // documents with at least one gold phrase
  std::size_t skipped = 0;
};

struct EvalReport {
  CategoryScores present;
  CategoryScores absent;
  double avg_present_preds = 0.0;  // #PK
  double avg_absent_preds = 0.0;   // #AK
  double avg_raw_preds = 0.0;      // predictions per document before dedup
  double dup_ratio = 0.0;
  std::size_t documents = 0;
  std::vector<CodeUsage> code_usage;
};

struct GoldRecord {
  Tokens source;
  std::vector<Tokens> present;
  std::vector<Tokens> absent;
};

inline GoldRecord make_gold(const Preprocessed& p) {
  const Tokens stemmed = stem_all(p.source);
  GoldRecord g;
  g.source = p.source;
  std::set<Tokens> seen;
  for (const auto& ph : p.phrases) {
    if (!seen.insert(stem_all(ph)).second) continue;
    (is_present_in(stemmed, ph) ? g.present : g.absent).push_back(ph);
  }
  return g;
}

inline GoldRecord make_gold(const Example& ex) {
  GoldRecord g;
  g.source = ex.doc.tokens;
  for (const auto& t : ex.targets.present) g.present.push_back(t.words);
  for (const auto& t : ex.targets.absent) g.absent.push_back(t.words);
  return g;
}

// Fraction of documents where each code emitted a present phrase, an
// absent phrase or nothing.
inline std::vector<CodeUsage> code_usage_stats(const std::vector<PredictionRecord>& preds,
                                               const std::vector<GoldRecord>& golds) {
  std::size_t n_codes = 0;
  for (const auto& p : preds) n_codes = std::max(n_codes, p.code_outputs.size());
  std::vector<CodeUsage> usage(n_codes);
  if (preds.empty() || n_codes == 0) return usage;
  for (std::size_t d = 0; d < preds.size(); ++d) {
    const Tokens stemmed = stem_all(golds[d].source);
    for (std::size_t c = 0; c < n_codes; ++c) {
      const std::string out = c < preds[d].code_outputs.size() ? preds[d].code_outputs[c] : "";
      const Tokens ph = tokenize(out);
      if (ph.empty()) {
        usage[c].null += 1.0;
      } else if (is_present_in(stemmed, ph)) {
        usage[c].present += 1.0;
      } else {
        usage[c].absent += 1.0;
      }
    }
  }
  const auto n = static_cast<double>(preds.size());
  for (auto& u : usage) {
    u.present /= n;
    u.absent /= n;
    u.null /= n;
  }
  return usage;
}

inline std::vector<Tokens> tokenize_all(const std::vector<std::string>& phrases) {
  std::vector<Tokens> out;
  for (const auto& s : phrases) out.push_back(tokenize(s));
  return out;
}

// Macro-averaged report; preds[i] is scored against golds[i].
inline EvalReport evaluate(const std::vector<PredictionRecord>& preds, const std::vector<GoldRecord>& golds,
                           std::uint64_t seed = 0) {
  if (preds.size() != golds.size()) throw std::invalid_argument("evaluate: prediction/gold count mismatch");
  std::mt19937_64 rng(seed);
  EvalReport rep;
  rep.documents = preds.size();
  std::size_t dup_docs = 0;
  auto accumulate = [&](CategoryScores& cs, const std::vector<Tokens>& p, const std::vector<Tokens>& g) {
    auto m = f1_at_m(p, g);
    if (!m) {
      ++cs.skipped;
      return;
    }
    auto five = f1_at_5(p, g, &rng);
    ++cs.scored;
    cs.f1_at_m += m->f1;
    cs.p_at_m += m->precision;
    cs.r_at_m += m->recall;
    cs.f1_at_5 += five->f1;
  };
  for (std::size_t d = 0; d < preds.size(); ++d) {
    const auto pp = tokenize_all(preds[d].present_pred);
    const auto ap = tokenize_all(preds[d].absent_pred);
    accumulate(rep.present, pp, golds[d].present);
    accumulate(rep.absent, ap, golds[d].absent);
    rep.avg_present_preds += static_cast<double>(pp.size());
    rep.avg_absent_preds += static_cast<double>(ap.size());
    rep.avg_raw_preds += static_cast<double>(preds[d].raw_count);
    if (preds[d].raw_count > 0) {
      ++dup_docs;
      rep.dup_ratio += static_cast<double>(preds[d].dup_count) / static_cast<double>(preds[d].raw_count);
    }
  }
  for (CategoryScores* cs : {&rep.present, &rep.absent}) {
    if (cs->scored == 0) continue;
    const auto n = static_cast<double>(cs->scored);
    cs->f1_at_5 /= n;
    cs->f1_at_m /= n;
    cs->p_at_m /= n;
    cs->r_at_m /= n;
  }
  if (!preds.empty()) {
    const auto n = static_cast<double>(preds.size());
    rep.avg_present_preds /= n;
    rep.avg_absent_preds /= n;
    rep.avg_raw_preds /= n;
  }
  if (dup_docs > 0) rep.dup_ratio /= static_cast<double>(dup_docs);
  rep.code_usage = code_usage_stats(preds, golds);
  return rep;
}

inline void print_table(std::ostream& os, const EvalReport& r) {
  os << std::fixed << std::setprecision(4);
  os << "documents        " << r.documents << '\n';
  os << "category   F1@5     F1@M     P@M      R@M      scored\n";
  auto row = [&](const char* name, const CategoryScores& c) {
    os << std::left << std::setw(11) << name << std::setw(9) << c.f1_at_5 << std::setw(9) << c.f1_at_m
       << std::setw(9) << c.p_at_m << std::setw(9) << c.r_at_m << c.scored << '\n';
  };
  row("present", r.present);
  row("absent", r.absent);
  os << "#PK              " << r.avg_present_preds << '\n';
  os << "#AK              " << r.avg_absent_preds << '\n';
  os << "Dup              " << r.dup_ratio << '\n';
  os.unsetf(std::ios::floatfield);
}

inline void write_csv(std::ostream& os, const EvalReport& r) {
  os << "metric,value\n";
  os << "present_f1_at_5," << r.present.f1_at_5 << '\n';
  os << "present_f1_at_m," << r.present.f1_at_m << '\n';
  os << "present_p_at_m," << r.present.p_at_m << '\n';
  os << "present_r_at_m," << r.present.r_at_m << '\n';
  os << "absent_f1_at_5," << r.absent.f1_at_5 << '\n';
  os << "absent_f1_at_m," << r.absent.f1_at_m << '\n';
  os << "absent_p_at_m," << r.absent.p_at_m << '\n';
  os << "absent_r_at_m," << r.absent.r_at_m << '\n';
  os << "avg_present_preds," << r.avg_present_preds << '\n';
  os << "avg_absent_preds," << r.avg_absent_preds << '\n';
  os << "dup_ratio," << r.dup_ratio << '\n';
  os << "documents," << r.documents << '\n';
}

inline void write_code_usage_csv(std::ostream& os, const EvalReport& r) {
  os << "code,present,absent,null\n";
  for (std::size_t c = 0; c < r.code_usage.size(); ++c) {
    const auto& u = r.code_usage[c];
    os << c + 1 << ',' << u.present << ',' << u.absent << ',' << u.null << '\n';
  }
}

}  // namespace one2set
