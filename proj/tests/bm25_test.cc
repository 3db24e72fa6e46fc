// Copyright 2026 The Levdex Authors.
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

#include "levdex/bm25.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include <gtest/gtest.h>

#include "levdex/error.h"
#include "levdex/random.h"
#include "levdex/tokenizer.h"
#include "testing/bm25_reference.h"

namespace levdex {
namespace {

Bm25Document Doc(std::int64_t id, std::string text, std::string dialogue = "d") {
  return {id, {std::move(text)}, {{}, std::move(dialogue), static_cast<int>(id)}};
}

TEST(TokenizeTest, SplitsAndKeepsReservedTokens) {
  EXPECT_EQ(Tokenize("I want Thai food, please!"),
            (std::vector<std::string>{"i", "want", "thai", "food", "please"}));
  EXPECT_EQ(Tokenize("[hotel] stars NULL <eos_l1> [value_food] st. john's"),
            (std::vector<std::string>{"[hotel]", "stars", "NULL", "<eos_l1>", "[value_food]",
                                      "st", "john", "s"}));
  EXPECT_TRUE(Tokenize("  ,, ").empty());
}

TEST(Bm25IndexTest, EmptyIndexReturnsNothing) {
  const Bm25Index index = Bm25Index::Build({});
  EXPECT_EQ(index.n_docs(), 0u);
  EXPECT_TRUE(index.TopK({"anything"}, 5).empty());
}

TEST(Bm25IndexTest, CountsAndIdf) {
  const Bm25Index index =
      Bm25Index::Build({Doc(10, "cheap hotel north"), Doc(11, "cheap cheap taxi"), Doc(12, "x")});
  EXPECT_EQ(index.n_docs(), 3u);
  EXPECT_DOUBLE_EQ(index.avg_doc_length(), 7.0 / 3.0);
  EXPECT_EQ(index.DocFrequency("cheap"), 2u);
  EXPECT_EQ(index.DocFrequency("missing"), 0u);
  EXPECT_EQ(index.postings().at("cheap")[1], (Bm25Index::Posting{1, 2}));
  EXPECT_GT(index.Idf("hotel"), index.Idf("cheap"));
  EXPECT_GT(index.Idf("cheap"), 0.0);
  EXPECT_DOUBLE_EQ(index.Idf("missing"), std::log(1.0 + 3.5 / 0.5));
}

TEST(Bm25IndexTest, HandRanking) {
  const Bm25Index index = Bm25Index::Build(
      {Doc(1, "thai food in the centre"), Doc(2, "a taxi to the station"),
       Doc(3, "cheap thai place")});
  const auto hits = index.TopK({"thai food"}, 10);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].doc_id, 1);
  EXPECT_EQ(hits[1].doc_id, 3);
  EXPECT_EQ(hits[0].payload->turn_index, 1);
}

TEST(Bm25IndexTest, HandRankingWithDefaults) {
  const Bm25Index index = Bm25Index::Build(
      {Doc(1, "hotel area centre"), Doc(2, "train leaves monday"), Doc(3, "hotel stars")});
  const auto hits = index.TopK({"hotel area"}, 10);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].doc_id, 1);
  EXPECT_EQ(hits[1].doc_id, 3);
  // idf(hotel) = ln(1 + 1.5/2.5), idf(area) = ln(1 + 2.5/1.5), avgdl = 8/3.
  const double norm1 = 1.0 - 0.4 + 0.4 * 3.0 / (8.0 / 3.0);
  const double norm3 = 1.0 - 0.4 + 0.4 * 2.0 / (8.0 / 3.0);
  const double idf_hotel = std::log(1.6);
  const double idf_area = std::log(1.0 + 2.5 / 1.5);
  EXPECT_NEAR(hits[0].score, (idf_hotel + idf_area) * 1.9 / (1.0 + 0.9 * norm1), 1e-12);
  EXPECT_NEAR(hits[1].score, idf_hotel * 1.9 / (1.0 + 0.9 * norm3), 1e-12);
}

TEST(Bm25IndexTest, RareTermsWeighMore) {
  std::vector<Bm25Document> docs;
  for (int d = 0; d < 100; ++d) {
    std::string text = d < 50 ? "common" : "filler";
    if (d == 7) text += " rare";
    docs.push_back(Doc(d, text));
  }
  const Bm25Index index = Bm25Index::Build(docs);
  EXPECT_GT(index.Idf("rare"), index.Idf("common"));
  EXPECT_TRUE(index.TopK({"absent words"}, 5).empty());
}

TEST(Bm25IndexTest, TiesBreakByDocId) {
  const Bm25Index index =
      Bm25Index::Build({Doc(7, "north hotel"), Doc(3, "north hotel"), Doc(5, "south")});
  const auto hits = index.TopK({"north"}, 5);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].doc_id, 3);
  EXPECT_EQ(hits[1].doc_id, 7);
  EXPECT_EQ(hits[0].score, hits[1].score);
}

TEST(Bm25IndexTest, RejectsBadInput) {
  EXPECT_THROW(Bm25Index::Build({Doc(1, "a"), Doc(1, "b")}), Error);
  try {
    Bm25Index::Build({Doc(1, "a"), Doc(1, "b")});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicateDoc);
  }
  EXPECT_THROW(Bm25Index::Build({}, {.k1 = 0.0}), Error);
  EXPECT_THROW(Bm25Index::Build({}, {.k1 = 1.0, .b = 1.5}), Error);
}

TEST(Bm25IndexTest, MatchesReferenceOnRandomCorpora) {
  const std::vector<std::string> words = {"cheap", "hotel", "north", "thai", "taxi", "[v]",
                                          "<eos_b>", "the", "a", "centre", "food", "NULL"};
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const Bm25Params params{rng.Uniform(0.2, 2.0), rng.Uniform(0.0, 1.0)};
    const int n = rng.Between(1, 60);
    std::vector<Bm25Document> docs;
    std::vector<std::vector<std::string>> tokens;
    for (int d = 0; d < n; ++d) {
      std::string text;
      const int len = rng.Between(1, 15);
      for (int i = 0; i < len; ++i) text += rng.Pick(words) + " ";
      tokens.push_back(Tokenize(text));
      docs.push_back(Doc(d, text));
    }
    const Bm25Index index = Bm25Index::Build(docs, params);
    for (int q = 0; q < 5; ++q) {
      std::vector<std::string> query;
      for (int i = 0, len = rng.Between(1, 5); i < len; ++i) query.push_back(rng.Pick(words));
      std::string query_text;
      for (const auto& w : query) query_text += w + " ";
      const auto hits = index.TopK({query_text}, n);
      std::map<std::int64_t, double> got;
      for (const auto& h : hits) got[h.doc_id] = h.score;
      for (int d = 0; d < n; ++d) {
        const double want = testing::ReferenceBm25(tokens, d, Tokenize(query_text), params);
        if (want > 0.0) {
          ASSERT_TRUE(got.count(d)) << "doc " << d;
          EXPECT_NEAR(got[d], want, 1e-9);
        } else {
          EXPECT_FALSE(got.count(d));
        }
      }
      for (std::size_t i = 1; i < hits.size(); ++i) {
        EXPECT_TRUE(hits[i - 1].score > hits[i].score ||
                    (hits[i - 1].score == hits[i].score && hits[i - 1].doc_id < hits[i].doc_id));
      }
    }
  }
}

TEST(Bm25IndexTest, ExcludesDialogue) {
  const Bm25Index index = Bm25Index::Build(
      {Doc(1, "thai food", "a"), Doc(2, "thai food", "b"), Doc(3, "thai", "a")});
  const auto hits = index.TopK({"thai"}, 10, "a");
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].doc_id, 2);
}

TEST(Bm25IndexTest, SmallerKIsPrefix) {
  Rng rng(5);
  const std::vector<std::string> words = {"a", "b", "c", "d", "e"};
  std::vector<Bm25Document> docs;
  for (int d = 0; d < 40; ++d) {
    std::string text;
    for (int i = 0; i < 6; ++i) text += rng.Pick(words) + " ";
    docs.push_back(Doc(d, text));
  }
  const Bm25Index index = Bm25Index::Build(docs);
  const auto all = index.TopK({"a c e"}, 40);
  for (int k : {1, 3, 10}) {
    const auto top = index.TopK({"a c e"}, k);
    ASSERT_EQ(top.size(), static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) EXPECT_EQ(top[i].doc_id, all[i].doc_id);
  }
}

TEST(Bm25IndexTest, SaveLoadRoundTrip) {
  std::vector<Bm25Document> docs = {Doc(4, "thai food"), Doc(9, "north taxi")};
  docs[1].payload.lev = ParseLevSpanStrict("[taxi] leaveat NULL, destination ely");
  const Bm25Index index = Bm25Index::Build(docs, {.k1 = 1.2, .b = 0.75});
  const std::string path =
      (std::filesystem::temp_directory_path() / "levdex_bm25_test.bin").string();
  index.Save(path);
  const Bm25Index loaded = Bm25Index::Load(path);
  EXPECT_EQ(loaded, index);
  EXPECT_EQ(loaded.Serialize(), index.Serialize());
  std::filesystem::remove(path);

  std::string bytes = index.Serialize();
  bytes[9] = 7;  // version
  try {
    Bm25Index::Deserialize(bytes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kVersionMismatch);
  }
  EXPECT_THROW(Bm25Index::Deserialize(index.Serialize().substr(0, 30)), Error);
}

}  // namespace
}  // namespace levdex
