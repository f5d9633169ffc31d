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

#include <fstream>
#include <string>

#include "one2set/porter.hpp"

using one2set::porter_stem;

TEST(Porter, ReferenceVectors) {
  std::ifstream is(std::string(ONE2SET_TEST_DATA) + "/porter_vectors.tsv");
  ASSERT_TRUE(is.good());
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    ASSERT_NE(tab, std::string::npos) << line;
    const std::string word = line.substr(0, tab), stem = line.substr(tab + 1);
    EXPECT_EQ(porter_stem(word), stem) << word;
    ++n;
  }
  EXPECT_EQ(n, 100u);
}

TEST(Porter, DocumentedExamples) {
  EXPECT_EQ(porter_stem("models"), "model");
  EXPECT_EQ(porter_stem("caresses"), "caress");
  EXPECT_EQ(porter_stem("<digit>"), "<digit>");
}

TEST(Porter, ShortWordsUnchanged) {
  EXPECT_EQ(porter_stem("as"), "as");
  EXPECT_EQ(porter_stem("is"), "is");
  EXPECT_EQ(porter_stem("a"), "a");
  EXPECT_EQ(porter_stem(""), "");
}

TEST(Porter, NotIdempotent) {
  EXPECT_EQ(porter_stem("agreed"), "agre");
  EXPECT_EQ(porter_stem("agre"), "agr");
}

TEST(Porter, NeverLengthensWords) {
  for (const char* w : {"generalizations", "relational", "hopefulness", "conditional", "adjustment",
                        "controlling", "agreed", "happily", "networks", "keyphrases", "sky", "y"}) {
    EXPECT_LE(porter_stem(w).size(), std::string(w).size()) << w;
  }
}

TEST(Porter, StemAllMapsElementwise) {
  const std::vector<std::string> in{"neural", "models"};
  const auto out = one2set::stem_all(in);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], porter_stem("neural"));
  EXPECT_EQ(out[1], "model");
}
