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
#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace one2set {

// Reserved ids occupy the lowest indices of every vocabulary.
inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kBosId = 2;
inline constexpr int kEosId = 3;
inline constexpr int kNullId = 4;  // "no corresponding keyphrase"
inline constexpr int kSepId = 5;
inline constexpr int kDigitId = 6;
inline constexpr int kNumReserved = 7;

inline constexpr std::array<std::string_view, kNumReserved> kReservedWords = {
    "<pad>", "<unk>", "<bos>", "<eos>", "<null>", "<sep>", "<digit>"};

inline constexpr std::string_view kDigitWord = "<digit>";

class Vocabulary {
 public:
  Vocabulary() {
    for (auto w : kReservedWords) push(std::string(w));
  }

  std::size_t size() const { return words_.size(); }

  std::optional<int> find(const std::string& w) const {
    auto it = ids_.find(w);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  int id(const std::string& w) const { return find(w).value_or(kUnkId); }

  const std::string& word(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) {
      throw std::out_of_range("vocabulary id " + std::to_string(id));
    }
    return words_[static_cast<std::size_t>(id)];
  }

  const std::vector<std::string>& words() const { return words_; }

  // FNV-1a over the id-ordered word list; stamped into checkpoints.
  std::uint64_t hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& w : words_) {
      for (unsigned char c : w) {
        h ^= c;
        h *= 1099511628211ull;
      }
      h ^= '\n';
      h *= 1099511628211ull;
    }
    return h;
  }

  void save(std::ostream& os) const {
    for (const auto& w : words_) os << w << '\n';
  }

  void save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write vocabulary: " + path);
    save(os);
  }

  static Vocabulary load(std::istream& is) {
    Vocabulary v;
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line)) {
      if (n < kNumReserved) {
        if (line != kReservedWords[n]) {
          throw std::runtime_error("vocabulary file: reserved token mismatch at line " +
                                   std::to_string(n + 1));
        }
      } else {
        if (v.ids_.count(line)) {
          throw std::runtime_error("vocabulary file: duplicate word '" + line + "'");
        }
        v.push(line);
      }
      ++n;
    }
    if (n < kNumReserved) throw std::runtime_error("vocabulary file truncated");
    return v;
  }

  static Vocabulary load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read vocabulary: " + path);
    return load(is);
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_;
  }

 private:
  friend class VocabularyBuilder;

  void push(std::string w) {
    ids_.emplace(w, static_cast<int>(words_.size()));
    words_.push_back(std::move(w));
  }

  std::vector<std::string> words_;
  std::unordered_map<std::string, int> ids_;
};

// Frequency fold over token streams. Reserved spellings are never counted.
class VocabularyBuilder {
 public:
  void add(const std::vector<std::string>& tokens) {
    for (const auto& t : tokens) ++counts_[t];
  }

  // Keeps the `cap - reserved` most frequent words; ties go to the
  // lexicographically smaller word.
  Vocabulary build(std::size_t cap) const {
    if (cap <= static_cast<std::size_t>(kNumReserved)) {
      throw std::invalid_argument("vocabulary cap must exceed the reserved count");
    }
    std::vector<std::pair<std::string, std::size_t>> ranked;
    for (const auto& [w, c] : counts_) {
      if (is_reserved(w)) continue;
      ranked.emplace_back(w, c);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    Vocabulary v;
    const std::size_t room = cap - kNumReserved;
    for (std::size_t i = 0; i < ranked.size() && i < room; ++i) {
      v.push(ranked[i].first);
    }
    return v;
  }

  static bool is_reserved(const std::string& w) {
    return std::find(kReservedWords.begin(), kReservedWords.end(), w) !=
           kReservedWords.end();
  }

 private:
  std::map<std::string, std::size_t> counts_;
};

}  // namespace one2set
