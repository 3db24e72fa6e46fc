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

#include "levdex/pair_mining.h"

#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "levdex/error.h"
#include "levdex/tokenizer.h"
#include "testing/bm25_reference.h"

namespace levdex {
namespace {

struct Fixture {
  std::vector<ContextExample> pool;
  Bm25Index index;
};

Fixture FromJsonl(const std::string& text) {
  std::istringstream in(text);
  Fixture f;
  f.pool = EnumerateContexts(ParseJsonlCorpus(in));
  f.index = Bm25Index::Build(Bm25Documents(f.pool, {}));
  return f;
}

Fixture FromSynth(std::uint64_t seed, int n) {
  Fixture f;
  f.pool = EnumerateContexts(SynthCorpus({.seed = seed, .n_dialogues = n, .n_domains = 6}));
  f.index = Bm25Index::Build(Bm25Documents(f.pool, {}));
  return f;
}

constexpr char kSmall[] =
    R"({"id": "a", "turns": [{"user": "i need a cheap hotel in the north", "state": {"hotel": {"pricerange": "cheap", "area": "north"}}}]})"
    "\n"
    R"({"id": "b", "turns": [{"user": "a cheap hotel in the south please", "state": {"hotel": {"pricerange": "cheap", "area": "south"}}}]})"
    "\n"
    R"({"id": "c", "turns": [{"user": "a hotel with 4 stars", "state": {"hotel": {"stars": "4"}}}]})"
    "\n"
    R"({"id": "d", "turns": [{"user": "a taxi to the hotel", "state": {"taxi": {"destination": "hotel"}}}]})"
    "\n";

TEST(MinePairTest, SharedSlotsMakeThePositive) {
  const Fixture f = FromJsonl(kSmall);
  const TrainingPair pair = MinePair(f.pool[0], f.index, f.pool);
  EXPECT_EQ(pair.positive.context.dialogue_id, "b");
  EXPECT_EQ(pair.positive_f1, 1.0);
  EXPECT_EQ(pair.negative_f1, 0.0);
  EXPECT_NE(pair.negative.context.dialogue_id, "a");
  // Exhaustive oracle: b is the only other context with the same slot names.
  for (std::size_t i = 1; i < f.pool.size(); ++i) {
    EXPECT_EQ(SlotF1(f.pool[0].gold_lev, f.pool[i].gold_lev) == 1.0, i == 1);
  }
}

TEST(MinePairTest, AllZeroScoresKeepBm25Order) {
  const Fixture f = FromJsonl(
      std::string(kSmall) +
      R"({"id": "e", "turns": [{"user": "a train on the hotel day", "state": {"train": {"day": "monday"}}}]})");
  const ContextExample& anchor = f.pool.back();
  const auto scored = ScoreCandidates(anchor, f.index, {});
  ASSERT_GE(scored.size(), 2u);
  for (std::size_t i = 0; i < scored.size(); ++i) {
    EXPECT_EQ(scored[i].f1, 0.0);
    EXPECT_EQ(scored[i].bm25_rank, static_cast<int>(i));
  }
  const TrainingPair pair = MinePair(anchor, f.index, f.pool);
  EXPECT_EQ(pair.positive_f1, 0.0);
  EXPECT_EQ(pair.negative_f1, 0.0);
  EXPECT_EQ(pair.positive.context, f.pool[scored.front().doc].context);
  EXPECT_EQ(pair.negative.context, f.pool[scored.back().doc].context);
}

TEST(MinePairTest, InsufficientCandidates) {
  const Fixture f = FromJsonl(
      R"({"id": "a", "turns": [{"user": "cheap hotel", "state": {"hotel": {"pricerange": "cheap"}}}]})"
      "\n"
      R"({"id": "b", "turns": [{"user": "cheap taxi", "state": {"taxi": {"leaveat": "10:00"}}}]})");
  try {
    MinePair(f.pool[0], f.index, f.pool);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientCandidates);
  }
  const MiningResult result = MineDataset(f.pool, f.index);
  EXPECT_TRUE(result.pairs.empty());
  EXPECT_EQ(result.stats.n_skipped, 2u);
}

TEST(MinePairTest, AnchorIsNeverSelected) {
  const Fixture f = FromSynth(11, 60);
  for (const ContextExample& anchor : f.pool) {
    for (const ScoredCandidate& c : ScoreCandidates(anchor, f.index, {.top = 100})) {
      const DialogueContext& ctx = f.pool[c.doc].context;
      EXPECT_FALSE(ctx.dialogue_id == anchor.context.dialogue_id &&
                   ctx.turn_index == anchor.context.turn_index);
    }
  }
}

TEST(MinePairTest, ValueMatchingScoresTriples) {
  const Fixture f = FromSynth(14, 30);
  for (std::size_t a = 0; a < f.pool.size(); a += 5) {
    const ContextExample& anchor = f.pool[a];
    for (const ScoredCandidate& c :
         ScoreCandidates(anchor, f.index, {.top = 20, .match_values = true})) {
      EXPECT_EQ(c.f1,
                SlotF1(anchor.gold_lev, f.pool[c.doc].gold_lev, SlotMatch::kNameAndValue));
    }
  }
}

TEST(MinePairTest, SameDialogueExclusionFlag) {
  const Fixture f = FromSynth(12, 40);
  for (const ContextExample& anchor : f.pool) {
    for (const ScoredCandidate& c :
         ScoreCandidates(anchor, f.index, {.top = 20, .exclude_same_dialogue = true})) {
      EXPECT_NE(f.pool[c.doc].context.dialogue_id, anchor.context.dialogue_id);
    }
  }
}

TEST(MineDatasetTest, PositiveIsTheBestOfTheReferenceTop100) {
  const Fixture f = FromSynth(13, 100);
  std::vector<std::vector<std::string>> tokens;
  for (const ContextExample& ex : f.pool) tokens.push_back(Tokenize(KeyText(ex, {}).text));
  const MiningResult result = MineDataset(f.pool, f.index);
  std::map<std::pair<std::string, int>, const TrainingPair*> by_anchor;
  for (const TrainingPair& p : result.pairs) {
    by_anchor[{p.anchor.context.dialogue_id, p.anchor.context.turn_index}] = &p;
  }
  for (std::size_t a = 0; a < f.pool.size(); a += 7) {
    const ContextExample& anchor = f.pool[a];
    const auto ranking =
        testing::ReferenceRanking(tokens, Tokenize(QueryText(anchor.context, {}).text));
    double best = -1.0;
    int kept = 0;
    for (std::size_t d : ranking) {
      if (d == a) continue;
      if (++kept > 100) break;
      best = std::max(best, SlotF1(anchor.gold_lev, f.pool[d].gold_lev));
    }
    const auto it = by_anchor.find({anchor.context.dialogue_id, anchor.context.turn_index});
    if (kept < 2) {
      EXPECT_EQ(it, by_anchor.end());
      continue;
    }
    ASSERT_NE(it, by_anchor.end());
    EXPECT_EQ(it->second->positive_f1, best);
  }
}

TEST(MineDatasetTest, StatsOrderAndDeterminism) {
  const Fixture f = FromSynth(14, 100);
  const MiningResult result = MineDataset(f.pool, f.index);
  EXPECT_EQ(result.stats.n_pairs + result.stats.n_skipped, f.pool.size());
  EXPECT_LE(result.pairs.size(), f.pool.size());
  EXPECT_GE(result.stats.mean_positive_f1, result.stats.mean_negative_f1);
  for (const TrainingPair& p : result.pairs) EXPECT_GE(p.positive_f1, p.negative_f1);
  for (std::size_t i = 1; i < result.pairs.size(); ++i) {
    const auto& x = result.pairs[i - 1].anchor.context;
    const auto& y = result.pairs[i].anchor.context;
    EXPECT_TRUE(std::tie(x.dialogue_id, x.turn_index) < std::tie(y.dialogue_id, y.turn_index));
  }
  std::ostringstream first, second;
  WritePairs(result.pairs, first);
  WritePairs(MineDataset(f.pool, f.index).pairs, second);
  EXPECT_EQ(first.str(), second.str());
}

TEST(MineDatasetTest, JsonlRoundTrip) {
  const Fixture f = FromSynth(15, 30);
  const MiningResult result = MineDataset(f.pool, f.index);
  std::ostringstream out;
  WritePairs(result.pairs, out);
  std::istringstream in(out.str());
  const std::vector<TrainingPair> back = ReadPairs(in);
  ASSERT_EQ(back.size(), result.pairs.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].anchor.context, result.pairs[i].anchor.context);
    EXPECT_EQ(back[i].positive.gold_state, result.pairs[i].positive.gold_state);
    EXPECT_EQ(back[i].negative.gold_lev, result.pairs[i].negative.gold_lev);
    EXPECT_EQ(back[i].positive_f1, result.pairs[i].positive_f1);
  }
  std::istringstream bad("{\"anchor\": 1}\n");
  EXPECT_THROW(ReadPairs(bad), Error);
}

}  // namespace
}  // namespace levdex
