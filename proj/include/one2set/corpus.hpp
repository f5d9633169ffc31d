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
#include <cctype>
#include <fstream>
#include <istream>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>
#include "one2set/porter.hpp"
#include "one2set/vocabulary.hpp"

namespace one2set {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RawSample {
  std::string title;
  std::string abstract;
  std::vector<std::string> keyphrases;
};

using Tokens = std::vector<std::string>;

// ---------------------------------------------------------------------------
// Tokenization

inline bool is_punct_byte(unsigned char c) {
  return c < 0x80 && std::ispunct(c);
}

inline bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c);
  });
}

// Lowercases, splits on whitespace, detaches ASCII punctuation into
// single-character tokens and replaces all-digit tokens with <digit>.
// The literal "<digit>" survives as one token so the mapping is idempotent.
inline Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    out.push_back(all_digits(cur) ? std::string(kDigitWord) : cur);
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      flush();
    } else if (c == '<' && text.substr(i, kDigitWord.size()) == kDigitWord) {
      flush();
      out.emplace_back(kDigitWord);
      i += kDigitWord.size() - 1;
    } else if (is_punct_byte(c)) {
      flush();
      out.emplace_back(1, static_cast<char>(c));
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return out;
}

inline std::string join(const Tokens& toks, std::string_view sep = " ") {
  std::string s;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) s += sep;
    s += toks[i];
  }
  return s;
}

struct PreprocessOptions {
  bool title_separator = false;  // insert <sep> between title and abstract
};

struct Preprocessed {
  Tokens source;
  std::vector<Tokens> phrases;
};

inline Preprocessed preprocess(const RawSample& raw,
                               const PreprocessOptions& opts = {}) {
  Preprocessed p;
  p.source = tokenize(raw.title);
  Tokens body = tokenize(raw.abstract);
  if (opts.title_separator && !p.source.empty() && !body.empty()) {
    p.source.emplace_back(kReservedWords[kSepId]);
  }
  p.source.insert(p.source.end(), body.begin(), body.end());
  if (p.source.empty()) throw CorpusError("empty source after preprocessing");
  for (const auto& kp : raw.keyphrases) {
    Tokens t = tokenize(kp);
    if (!t.empty()) p.phrases.push_back(std::move(t));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Documents and targets

struct Document {
  Tokens tokens;                 // preprocessed surface tokens
  std::vector<int> source_ids;   // fixed-vocabulary ids, UNK for OOV
  Tokens oov_words;              // unique OOV surface forms, first-seen order
  std::vector<int> extended_ids;  // OOVs mapped to vocab_size + oov index
  std::size_t vocab_size = 0;

  std::size_t extended_size() const { return vocab_size + oov_words.size(); }
};

inline Document encode_document(const Tokens& tokens, const Vocabulary& vocab) {
  Document d;
  d.tokens = tokens;
  d.vocab_size = vocab.size();
  d.source_ids.reserve(tokens.size());
  d.extended_ids.reserve(tokens.size());
  for (const auto& w : tokens) {
    if (auto id = vocab.find(w)) {
      d.source_ids.push_back(*id);
      d.extended_ids.push_back(*id);
      continue;
    }
    d.source_ids.push_back(kUnkId);
    auto it = std::find(d.oov_words.begin(), d.oov_words.end(), w);
    const auto pos = static_cast<std::size_t>(it - d.oov_words.begin());
    if (it == d.oov_words.end()) d.oov_words.push_back(w);
    d.extended_ids.push_back(static_cast<int>(vocab.size() + pos));
  }
  return d;
}

// Id of a word in the document's extended vocabulary (UNK if neither in the
// fixed vocabulary nor in the document).
inline int extended_id(const std::string& w, const Document& doc,
                       const Vocabulary& vocab) {
  if (auto id = vocab.find(w)) return *id;
  auto it = std::find(doc.oov_words.begin(), doc.oov_words.end(), w);
  if (it != doc.oov_words.end()) {
    return static_cast<int>(doc.vocab_size + (it - doc.oov_words.begin()));
  }
  return kUnkId;
}

inline std::string surface(int ext_id, const Document& doc,
                           const Vocabulary& vocab) {
  if (ext_id >= 0 && static_cast<std::size_t>(ext_id) < vocab.size()) {
    return vocab.word(ext_id);
  }
  const auto k = static_cast<std::size_t>(ext_id) - doc.vocab_size;
  if (ext_id < 0 || k >= doc.oov_words.size()) {
    throw std::out_of_range("extended id outside document vocabulary");
  }
  return doc.oov_words[k];
}

struct KeyphraseTarget {
  std::vector<int> ids;  // extended ids ending in EOS, or exactly {NULL}
  Tokens words;          // surface tokens, empty for the null target
  bool is_null = false;
  long position = -1;    // first stemmed occurrence in the source; -1 if absent

  static KeyphraseTarget null() {
    KeyphraseTarget t;
    t.ids = {kNullId};
    t.is_null = true;
    return t;
  }
};

struct TargetSet {
  std::vector<KeyphraseTarget> present;
  std::vector<KeyphraseTarget> absent;
};

// Start of the first contiguous occurrence of `needle` in `haystack`, or -1.
inline long find_subsequence(const Tokens& haystack, const Tokens& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return -1;
  auto it = std::search(haystack.begin(), haystack.end(), needle.begin(),
                        needle.end());
  return it == haystack.end() ? -1 : static_cast<long>(it - haystack.begin());
}

inline KeyphraseTarget encode_target(const Tokens& words, const Document& doc,
                                     const Vocabulary& vocab) {
  KeyphraseTarget t;
  t.words = words;
  for (const auto& w : words) t.ids.push_back(extended_id(w, doc, vocab));
  t.ids.push_back(kEosId);
  return t;
}

// A phrase is present iff its stemmed tokens occur contiguously in the
// stemmed source. Stem-level duplicates keep their first occurrence.
inline TargetSet split_present_absent(const Document& doc,
                                      const std::vector<Tokens>& phrases,
                                      const Vocabulary& vocab) {
  const Tokens stemmed_source = stem_all(doc.tokens);
  std::set<Tokens> seen;
  TargetSet ts;
  for (const auto& ph : phrases) {
    if (ph.empty()) continue;
    Tokens stemmed = stem_all(ph);
    if (!seen.insert(stemmed).second) continue;
    KeyphraseTarget t = encode_target(ph, doc, vocab);
    t.position = find_subsequence(stemmed_source, stemmed);
    (t.position >= 0 ? ts.present : ts.absent).push_back(std::move(t));
  }
  return ts;
}

struct PaddedTargets {
  std::vector<KeyphraseTarget> targets;
  std::size_t truncated = 0;
};

inline PaddedTargets pad_target_set(const std::vector<KeyphraseTarget>& targets,
                                    std::size_t slots) {
  PaddedTargets out;
  const std::size_t keep = std::min(targets.size(), slots);
  out.targets.assign(targets.begin(), targets.begin() + static_cast<long>(keep));
  out.truncated = targets.size() - keep;
  while (out.targets.size() < slots) out.targets.push_back(KeyphraseTarget::null());
  return out;
}

// catSeq-style sequence: present phrases by first occurrence, then absent
// phrases in their given order, separated by <sep> and closed by <eos>.
inline std::vector<int> build_one2seq_target(const TargetSet& ts) {
  std::vector<const KeyphraseTarget*> order;
  for (const auto& t : ts.present) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto* a, const auto* b) { return a->position < b->position; });
  for (const auto& t : ts.absent) order.push_back(&t);
  std::vector<int> seq;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i) seq.push_back(kSepId);
    const auto& ids = order[i]->ids;
    seq.insert(seq.end(), ids.begin(), ids.end() - 1);  // drop per-phrase EOS
  }
  seq.push_back(kEosId);
  return seq;
}

// ---------------------------------------------------------------------------
// Datasets

struct Example {
  Document doc;
  TargetSet targets;
};

inline RawSample parse_sample(const nlohmann::json& j) {
  RawSample s;
  s.title = j.value("title", std::string());
  s.abstract = j.value("abstract", std::string());
  if (j.contains("keyphrases")) {
    for (const auto& k : j.at("keyphrases")) s.keyphrases.push_back(k.get<std::string>());
  }
  return s;
}

inline nlohmann::json to_json(const RawSample& s) {
  return nlohmann::json{
      {"title", s.title}, {"abstract", s.abstract}, {"keyphrases", s.keyphrases}};
}

inline std::vector<RawSample> read_jsonl(std::istream& is) {
  std::vector<RawSample> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_sample(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw CorpusError("line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<RawSample> read_jsonl(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw CorpusError("cannot open " + path);
  return read_jsonl(is);
}

struct CorpusStats {
  std::size_t read = 0;
  std::size_t rejected = 0;
  std::size_t duplicates = 0;
};

struct PreparedCorpus {
  std::vector<Preprocessed> samples;
  CorpusStats stats;
};

// Preprocesses, drops rejected samples and removes exact duplicates keyed on
// (source tokens, sorted stemmed keyphrases).
inline PreparedCorpus prepare(const std::vector<RawSample>& raws,
                              const PreprocessOptions& opts = {},
                              bool dedup = true) {
  PreparedCorpus pc;
  std::set<std::pair<Tokens, std::vector<Tokens>>> seen;
  for (const auto& raw : raws) {
    ++pc.stats.read;
    Preprocessed p;
    try {
      p = preprocess(raw, opts);
    } catch (const CorpusError&) {
      ++pc.stats.rejected;
      continue;
    }
    if (dedup) {
      std::vector<Tokens> key;
      for (const auto& ph : p.phrases) key.push_back(stem_all(ph));
      std::sort(key.begin(), key.end());
      if (!seen.emplace(p.source, std::move(key)).second) {
        ++pc.stats.duplicates;
        continue;
      }
    }
    pc.samples.push_back(std::move(p));
  }
  return pc;
}

// Vocabulary over source and keyphrase tokens, so absent-only words are
// generatable from the fixed vocabulary.
inline Vocabulary build_vocabulary(const std::vector<Preprocessed>& corpus,
                                   std::size_t cap) {
  VocabularyBuilder b;
  for (const auto& p : corpus) {
    b.add(p.source);
    for (const auto& ph : p.phrases) b.add(ph);
  }
  return b.build(cap);
}

inline Example make_example(const Preprocessed& p, const Vocabulary& vocab) {
  Example ex;
  ex.doc = encode_document(p.source, vocab);
  ex.targets = split_present_absent(ex.doc, p.phrases, vocab);
  return ex;
}

inline std::vector<Example> make_examples(const std::vector<Preprocessed>& ps,
                                          const Vocabulary& vocab) {
  std::vector<Example> out;
  out.reserve(ps.size());
  for (const auto& p : ps) out.push_back(make_example(p, vocab));
  return out;
}

}  // namespace one2set
