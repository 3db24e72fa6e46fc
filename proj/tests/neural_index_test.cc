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

#include "levdex/neural_index.h"

#include <filesystem>

#include <gtest/gtest.h>

#include "levdex/error.h"
#include "levdex/random.h"
#include "levdex/retriever.h"

namespace levdex {
namespace {

DocPayload Payload(std::string dialogue, int turn, std::string lev = "") {
  return {ParseLevSpanStrict(lev), std::move(dialogue), turn};
}

NeuralIndex RandomIndex(Rng& rng, int n, int dim) {
  std::vector<Eigen::VectorXd> keys;
  std::vector<DocPayload> payloads;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd k(dim);
    for (int j = 0; j < dim; ++j) k(j) = rng.Uniform(-1, 1);
    keys.push_back(k);
    payloads.push_back(Payload("d" + std::to_string(rng.Below(10)), i, "[hotel] stars 4"));
  }
  return NeuralIndex::FromKeys(keys, payloads, dim, 42, {});
}

TEST(NeuralIndexTest, EmptyCorpusGivesEmptyIndex) {
  const Vocab vocab = Vocab::FromTokens({"a"});
  const NeuralIndex index = NeuralIndex::Build(InitDualEncoder(vocab, 4, 1), {}, {});
  EXPECT_EQ(index.size(), 0u);
  try {
    index.Query(Eigen::VectorXd::Zero(4), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyIndex);
  }
}

TEST(NeuralIndexTest, OneEntryPerContextAndDeterministicBytes) {
  const Corpus corpus = SynthCorpus({.seed = 5, .n_dialogues = 30});
  const auto examples = EnumerateContexts(corpus);
  std::vector<std::string> texts;
  for (const auto& ex : examples) texts.push_back(KeyText(ex, {.delex = true}).text);
  const DualEncoder encoder = InitDualEncoder(Vocab::Build(texts), 8, 2);
  const NeuralIndex a = NeuralIndex::Build(encoder, examples, {.delex = true});
  const NeuralIndex b = NeuralIndex::Build(encoder, examples, {.delex = true});
  EXPECT_EQ(a.size(), examples.size());
  EXPECT_EQ(a.Serialize(), b.Serialize());
  EXPECT_TRUE(a.MatchesEncoder(encoder));
  DualEncoder other = encoder;
  other.key.proj_b(0) += 1.0;
  EXPECT_FALSE(a.MatchesEncoder(other));
}

TEST(NeuralIndexTest, SingleEntryAndExclusion) {
  const NeuralIndex index = NeuralIndex::FromKeys({Eigen::Vector2d(1, 0)},
                                                  {Payload("x", 0, "[taxi] day monday")}, 2, 0, {});
  const auto hits = index.Query(Eigen::Vector2d(-3, 7), 3);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].payload.dialogue_id, "x");
  EXPECT_EQ(hits[0].score, -3.0);
  EXPECT_TRUE(index.Query(Eigen::Vector2d(1, 1), 3, "x").empty());
}

TEST(NeuralIndexTest, DimensionChecks) {
  EXPECT_THROW(NeuralIndex::FromKeys({Eigen::Vector3d(1, 0, 0)}, {Payload("x", 0)}, 2, 0, {}),
               Error);
  const NeuralIndex index =
      NeuralIndex::FromKeys({Eigen::Vector2d(1, 0)}, {Payload("x", 0)}, 2, 0, {});
  try {
    index.Query(Eigen::Vector3d(1, 0, 0), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimMismatch);
  }
}

TEST(NeuralIndexTest, MatchesBruteForce) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = rng.Between(1, 12);
    const int n = rng.Between(1, 150);
    const NeuralIndex index = RandomIndex(rng, n, dim);
    Eigen::VectorXd q(dim);
    for (int j = 0; j < dim; ++j) q(j) = rng.Uniform(-1, 1);
    const std::string exclude = "d" + std::to_string(rng.Below(10));
    const auto hits = index.Query(q, n, exclude);
    std::size_t expected = 0;
    for (int i = 0; i < n; ++i) expected += index.payload(i).dialogue_id != exclude;
    ASSERT_EQ(hits.size(), expected);
    for (std::size_t h = 0; h < hits.size(); ++h) {
      const int i = hits[h].payload.turn_index;
      double brute = 0.0;
      for (int j = 0; j < dim; ++j) brute += q(j) * index.keys()(i, j);
      EXPECT_NEAR(hits[h].score, brute, 1e-12);
      EXPECT_NE(hits[h].payload.dialogue_id, exclude);
      if (h > 0) EXPECT_GE(hits[h - 1].score, hits[h].score);
    }
  }
}

TEST(NeuralIndexTest, TiesBreakByProvenance) {
  const NeuralIndex index = NeuralIndex::FromKeys(
      {Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0)},
      {Payload("b", 0), Payload("a", 2), Payload("a", 1)}, 2, 0, {});
  const auto hits = index.Query(Eigen::Vector2d(1, 0), 3);
  EXPECT_EQ(hits[0].payload.turn_index, 1);
  EXPECT_EQ(hits[1].payload.turn_index, 2);
  EXPECT_EQ(hits[2].payload.dialogue_id, "b");
}

TEST(NeuralIndexTest, PrefixAndScaleInvariance) {
  Rng rng(4);
  const NeuralIndex index = RandomIndex(rng, 80, 6);
  std::vector<Eigen::VectorXd> scaled;
  std::vector<DocPayload> payloads;
  for (std::size_t i = 0; i < index.size(); ++i) {
    scaled.push_back(3.5 * index.keys().row(static_cast<Eigen::Index>(i)).transpose());
    payloads.push_back(index.payload(i));
  }
  const NeuralIndex bigger = NeuralIndex::FromKeys(scaled, payloads, 6, 0, {});
  for (int q = 0; q < 20; ++q) {
    Eigen::VectorXd query(6);
    for (int j = 0; j < 6; ++j) query(j) = rng.Uniform(-1, 1);
    const auto top3 = index.Query(query, 3);
    const auto top1 = index.Query(query, 1);
    EXPECT_EQ(top1[0].payload, top3[0].payload);
    const auto top3_scaled = bigger.Query(query, 3);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(top3[i].payload, top3_scaled[i].payload);
  }
}

TEST(NeuralIndexTest, SaveLoadRoundTrip) {
  Rng rng(5);
  const NeuralIndex index = RandomIndex(rng, 100, 7);
  const std::string path =
      (std::filesystem::temp_directory_path() / "levdex_index_test.bin").string();
  index.Save(path);
  const NeuralIndex back = NeuralIndex::Load(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back, index);
  const Eigen::VectorXd q = Eigen::VectorXd::LinSpaced(7, -1, 1);
  const auto before = index.Query(q, 3, "d1");
  const auto after = back.Query(q, 3, "d1");
  ASSERT_EQ(before.size(), after.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_EQ(before[i].score, after[i].score);
    EXPECT_EQ(before[i].payload, after[i].payload);
  }
  const std::string bytes = index.Serialize();
  for (std::size_t cut : {std::size_t{3}, std::size_t{12}, std::size_t{40}, bytes.size() - 2}) {
    try {
      NeuralIndex::Deserialize(bytes.substr(0, cut));
      FAIL() << cut;
    } catch (const Error& e) {
      EXPECT_TRUE(e.code() == ErrorCode::kIoError || e.code() == ErrorCode::kVersionMismatch);
    }
  }
}

TEST(RetrieverTest, RandomIsDeterministicAndExcludes) {
  std::vector<DocPayload> pool;
  for (int i = 0; i < 20; ++i) pool.push_back(Payload(i < 10 ? "a" : "b", i));
  const RandomRetriever r(pool, 7);
  DialogueContext ctx;
  ctx.dialogue_id = "a";
  ctx.turn_index = 3;
  const auto first = r.Retrieve(ctx, 3, "a");
  ASSERT_EQ(first.size(), 3u);
  for (const auto& hit : first) EXPECT_EQ(hit.payload.dialogue_id, "b");
  const auto second = r.Retrieve(ctx, 3, "a");
  for (int i = 0; i < 3; ++i) EXPECT_EQ(first[i].payload, second[i].payload);
  EXPECT_EQ(r.Retrieve(ctx, 50, std::nullopt).size(), 20u);
}

TEST(RetrieverTest, Bm25AndNeuralAgreeOnFormat) {
  const Corpus corpus = SynthCorpus({.seed = 6, .n_dialogues = 30});
  const auto examples = EnumerateContexts(corpus);
  const Bm25Index bm25 = Bm25Index::Build(Bm25Documents(examples, {}));
  const Bm25Retriever retriever(bm25, {});
  const auto hits = retriever.Retrieve(examples[5].context, 3, examples[5].context.dialogue_id);
  ASSERT_FALSE(hits.empty());
  for (const auto& h : hits) EXPECT_NE(h.payload.dialogue_id, examples[5].context.dialogue_id);
  EXPECT_EQ(NoRetriever().Retrieve(examples[0].context, 3, std::nullopt).size(), 0u);
  const double f1 = TopOneSlotF1(retriever, examples);
  EXPECT_GE(f1, 0.0);
  EXPECT_LE(f1, 1.0);
}

}  // namespace
}  // namespace levdex
