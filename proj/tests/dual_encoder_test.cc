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

#include "levdex/dual_encoder.h"

#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "levdex/error.h"
#include "levdex/random.h"
#include "testing/finite_diff.h"

namespace levdex {
namespace {

std::vector<int> RandomIds(Rng& rng, int vocab_size, int max_len) {
  std::vector<int> ids;
  for (int i = 0, n = rng.Between(1, max_len); i < n; ++i) {
    ids.push_back(static_cast<int>(rng.Below(static_cast<std::size_t>(vocab_size))));
  }
  return ids;
}

std::vector<EncodedPair> RandomBatch(Rng& rng, int b, int vocab_size) {
  std::vector<EncodedPair> batch;
  for (int i = 0; i < b; ++i) {
    batch.push_back({RandomIds(rng, vocab_size, 6), RandomIds(rng, vocab_size, 6),
                     RandomIds(rng, vocab_size, 6)});
  }
  return batch;
}

TEST(VocabTest, UnknownIsZeroAndTokensAreSorted) {
  const std::vector<std::string> texts = {"Hotel north <eos_b>", "cheap hotel [v]"};
  const Vocab vocab = Vocab::Build(texts);
  EXPECT_EQ(vocab.tokens()[0], "<unk>");
  EXPECT_TRUE(std::is_sorted(vocab.tokens().begin() + 1, vocab.tokens().end()));
  EXPECT_NE(vocab.Id("hotel"), Vocab::kUnk);
  EXPECT_NE(vocab.Id("<eos_l3>"), Vocab::kUnk);
  EXPECT_EQ(vocab.Id("zebra"), Vocab::kUnk);
  EXPECT_EQ(vocab.Ids("hotel zebra"), (std::vector<int>{vocab.Id("hotel"), 0}));
}

TEST(EncodeTest, ZeroParamsGiveZeroVector) {
  const EncoderParams p = EncoderParams::Zeros(5, 4);
  EXPECT_TRUE(Encode(p, std::vector<int>{1, 2, 3}).isZero(0.0));
  EXPECT_TRUE(Encode(p, std::vector<int>{}).isZero(0.0));
}

TEST(EncodeTest, EmptyInputPoolsToZero) {
  const EncoderParams p = EncoderParams::Random(5, 3, 1);
  EXPECT_TRUE(Pool(p, std::vector<int>{}).isZero(0.0));
  EXPECT_TRUE(Encode(p, std::vector<int>{}).isApprox(p.proj_b));
}

TEST(EncodeTest, OrderFree) {
  const EncoderParams p = EncoderParams::Random(10, 6, 2);
  const Eigen::VectorXd a = Encode(p, std::vector<int>{1, 4, 4, 7});
  const Eigen::VectorXd b = Encode(p, std::vector<int>{4, 7, 1, 4});
  EXPECT_LT((a - b).norm(), 1e-15);
}

TEST(EncodeTest, HandEvaluatedToy) {
  const std::vector<std::string> texts = {"hotel"};
  const Vocab vocab = Vocab::Build(texts);
  EncoderParams p = EncoderParams::Zeros(vocab.size(), 2);
  p.embedding.row(vocab.Id("hotel")) << 1.0, 2.0;
  p.proj_w << 0.5, -1.0, 3.0, 0.25;
  p.proj_b << 0.1, -0.2;
  const Eigen::VectorXd v = Encode(p, vocab.Ids("hotel"));
  EXPECT_DOUBLE_EQ(v(0), 0.5 * 1.0 - 1.0 * 2.0 + 0.1);
  EXPECT_DOUBLE_EQ(v(1), 3.0 * 1.0 + 0.25 * 2.0 - 0.2);
}

TEST(SimilarityTest, Examples) {
  EXPECT_EQ(Similarity(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)), 0.0);
  EXPECT_EQ(Similarity(Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 4)), 11.0);
  try {
    Similarity(Eigen::Vector2d(1, 2), Eigen::Vector3d(1, 2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimMismatch);
  }
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd q(17), k(17);
    double sum = 0.0;
    for (int i = 0; i < 17; ++i) {
      q(i) = rng.Uniform(-3, 3);
      k(i) = rng.Uniform(-3, 3);
      sum += q(i) * k(i);
    }
    EXPECT_NEAR(Similarity(q, k), sum, 1e-12);
  }
}

TEST(BatchLossTest, EqualSimilaritiesGiveLn2) {
  const EncoderParams p = EncoderParams::Random(8, 4, 5);
  const std::vector<EncodedPair> batch = {{{1, 2}, {3, 4}, {4, 3}}};
  EXPECT_NEAR(BatchLoss(p, p, batch).loss, std::log(2.0), 1e-12);
}

TEST(BatchLossTest, InBatchNegativeCount) {
  const EncoderParams p = EncoderParams::Random(8, 4, 6);
  const std::vector<EncodedPair> batch(16, EncodedPair{{1}, {2}, {2}});
  // All 32 keys are equal, so the positive competes with 31 negatives.
  EXPECT_NEAR(BatchLoss(p, p, batch).loss, std::log(32.0), 1e-12);
  EXPECT_NEAR(BatchLoss(p, p, batch, {.in_batch_negatives = false}).loss, std::log(2.0), 1e-12);
}

TEST(BatchLossTest, LargeGapGivesZeroLoss) {
  EncoderParams p = EncoderParams::Zeros(3, 1);
  p.proj_w(0, 0) = 1.0;
  p.embedding(1, 0) = std::sqrt(50.0);  // sim(anchor, positive) = 50
  const std::vector<EncodedPair> batch = {{{1}, {1}, {2}}};
  const double loss = BatchLoss(p, p, batch).loss;
  EXPECT_GE(loss, 0.0);
  EXPECT_LT(loss, 1e-20);
}

TEST(BatchLossTest, ShiftingAllScoresOfAnAnchorChangesNothing) {
  Rng rng(7);
  const EncoderParams q = EncoderParams::Random(12, 5, 8);
  EncoderParams k = EncoderParams::Random(12, 5, 9);
  const std::vector<EncodedPair> batch = RandomBatch(rng, 4, 12);
  const double before = BatchLoss(q, k, batch).loss;
  // A common offset on every key adds q_i . offset to all scores of anchor i.
  k.proj_b += Eigen::VectorXd::Constant(5, 0.7);
  EXPECT_NEAR(BatchLoss(q, k, batch).loss, before, 1e-12);
}

TEST(BatchLossTest, NonNegativeOnRandomBatches) {
  Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const EncoderParams q = EncoderParams::Random(20, 8, rng.NextU64());
    const EncoderParams k = EncoderParams::Random(20, 8, rng.NextU64());
    const int b = rng.Between(1, 6);
    const double loss = BatchLoss(q, k, RandomBatch(rng, b, 20)).loss;
    EXPECT_GE(loss, 0.0);
  }
}

TEST(BatchLossTest, GradientsMatchCentralDifferences) {
  Rng rng(11);
  for (bool in_batch : {true, false}) {
    EncoderParams q = EncoderParams::Random(10, 8, 12);
    EncoderParams k = EncoderParams::Random(10, 8, 13);
    // Larger weights than the default so every block carries real signal.
    q.embedding *= 10.0;
    k.embedding *= 10.0;
    q.proj_b.setRandom();
    k.proj_b.setRandom();
    const std::vector<EncodedPair> batch = RandomBatch(rng, 4, 10);
    const LossOptions options{in_batch};
    const BatchLossResult r = BatchLoss(q, k, batch, options);
    auto loss = [&] { return BatchLoss(q, k, batch, options, false).loss; };
    for (auto [value, grad] : {std::pair{&q, &r.grad_query}, std::pair{&k, &r.grad_key}}) {
      const auto c1 = testing::CheckGradient(value->embedding.data(), grad->embedding.data(),
                                             value->embedding.size(), loss);
      const auto c2 = testing::CheckGradient(value->proj_w.data(), grad->proj_w.data(),
                                             value->proj_w.size(), loss);
      const auto c3 = testing::CheckGradient(value->proj_b.data(), grad->proj_b.data(),
                                             value->proj_b.size(), loss);
      EXPECT_LT(c1.max_rel, 1e-5);
      EXPECT_LT(c2.max_rel, 1e-5);
      EXPECT_LT(c3.max_rel, 1e-5);
    }
  }
}

// Two groups of pairs whose anchors and positives share a group token.
std::vector<EncodedPair> Clusters() {
  std::vector<EncodedPair> data;
  for (int i = 0; i < 24; ++i) {
    const int group = i % 2;
    const int own = 1 + group;
    const int other = 2 - group;
    data.push_back({{own, 3 + i % 4}, {own, 7 + i % 3}, {other, 7 + (i + 1) % 3}});
  }
  return data;
}

TEST(TrainDualEncoderTest, SeparableClustersConverge) {
  const Vocab vocab = Vocab::FromTokens({"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"});
  const std::vector<EncodedPair> data = Clusters();
  const EncoderTrainResult r =
      TrainDualEncoder(InitDualEncoder(vocab, 8, 1), data,
                       {.dim = 8, .learning_rate = 0.05, .batch_size = 4, .epochs = 50,
                        .optimizer = OptimizerKind::kAdam, .in_batch_negatives = false});
  ASSERT_EQ(r.loss_curve.size(), 51u);
  EXPECT_LT(r.loss_curve.back(), 0.1 * r.loss_curve.front());
}

TEST(TrainDualEncoderTest, ZeroLearningRateIsANoOp) {
  const Vocab vocab = Vocab::FromTokens({"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"});
  const DualEncoder init = InitDualEncoder(vocab, 4, 2);
  const EncoderTrainResult r = TrainDualEncoder(
      init, Clusters(), {.dim = 4, .learning_rate = 0.0, .batch_size = 4, .epochs = 3});
  EXPECT_EQ(r.encoder, init);
  for (double l : r.loss_curve) EXPECT_EQ(l, r.loss_curve.front());
}

TEST(TrainDualEncoderTest, DeterministicAndNonIncreasing) {
  const Vocab vocab = Vocab::FromTokens({"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"});
  const EncoderTrainConfig cfg{.dim = 6, .learning_rate = 0.05, .batch_size = 5, .epochs = 10,
                               .seed = 9};
  const EncoderTrainResult a = TrainDualEncoder(InitDualEncoder(vocab, 6, 3), Clusters(), cfg);
  const EncoderTrainResult b = TrainDualEncoder(InitDualEncoder(vocab, 6, 3), Clusters(), cfg);
  EXPECT_EQ(a.encoder, b.encoder);
  EXPECT_EQ(a.loss_curve, b.loss_curve);
  EXPECT_LE(a.loss_curve.back(), a.loss_curve.front());
}

TEST(DualEncoderTest, UntrainedTowersStartEqual) {
  const Vocab vocab = Vocab::FromTokens({"a", "b"});
  const DualEncoder e = InitDualEncoder(vocab, 3, 4);
  EXPECT_EQ(e.query, e.key);
  EXPECT_TRUE(e.query.AllFinite());
}

TEST(DualEncoderTest, SaveLoadRoundTrip) {
  const std::vector<std::string> texts = {"cheap hotel north", "[hotel] area [v] <eos_b>"};
  DualEncoder e = InitDualEncoder(Vocab::Build(texts), 5, 6);
  e.key.proj_b.setConstant(0.25);
  const std::string path =
      (std::filesystem::temp_directory_path() / "levdex_encoder_test.bin").string();
  e.Save(path);
  const DualEncoder back = DualEncoder::Load(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back, e);
  EXPECT_EQ(back.Serialize(), e.Serialize());
  EXPECT_EQ(back.KeyFingerprint(), e.KeyFingerprint());
  DualEncoder other = e;
  other.key.proj_b(0) = 0.5;
  EXPECT_NE(other.KeyFingerprint(), e.KeyFingerprint());

  const std::string bytes = e.Serialize();
  for (std::size_t cut : {std::size_t{4}, std::size_t{20}, bytes.size() - 1}) {
    EXPECT_THROW(DualEncoder::Deserialize(bytes.substr(0, cut)), Error);
  }
}

}  // namespace
}  // namespace levdex
