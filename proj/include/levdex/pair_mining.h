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

#ifndef LEVDEX_PAIR_MINING_H_
#define LEVDEX_PAIR_MINING_H_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "levdex/bm25.h"
#include "levdex/corpus.h"

namespace levdex {

// One contrastive training instance. The spans are the gold deltas of the
// three turns; gold states are recovered as LevApply(prev_state, lev).
struct TrainingPair {
  ContextExample anchor;
  ContextExample positive;
  ContextExample negative;
  double positive_f1 = 0.0;
  double negative_f1 = 0.0;
};

struct MiningOptions {
  int top = 100;
  bool exclude_same_dialogue = false;
  bool match_values = false;  // score candidates on (domain, slot, value)
  ContextOptions query_format;  // must match the format the index was built with
};

struct ScoredCandidate {
  std::size_t doc = 0;  // position in the pool
  int bm25_rank = 0;  // among candidates, anchor removed
  double f1 = 0.0;
};

// BM25 candidates for an anchor, the anchor itself removed, sorted by slot F1
// descending with ties kept in BM25 order. The index must have been built
// from `pool` with doc_id equal to the pool position.
std::vector<ScoredCandidate> ScoreCandidates(const ContextExample& anchor, const Bm25Index& index,
                                             const MiningOptions& options);

// Positive is the first scored candidate and negative the last. Throws
// INSUFFICIENT_CANDIDATES with fewer than two candidates.
TrainingPair MinePair(const ContextExample& anchor, const Bm25Index& index,
                      std::span<const ContextExample> pool, const MiningOptions& options = {});

struct MiningStats {
  std::size_t n_contexts = 0;
  std::size_t n_pairs = 0;
  std::size_t n_skipped = 0;
  double mean_positive_f1 = 0.0;
  double mean_negative_f1 = 0.0;
  double frac_positive_perfect = 0.0;
};

struct MiningResult {
  std::vector<TrainingPair> pairs;  // ordered by (dialogue_id, turn_index)
  MiningStats stats;
};

// Mines every context of `pool` against an index built over the same pool.
MiningResult MineDataset(std::span<const ContextExample> pool, const Bm25Index& index,
                         const MiningOptions& options = {});

nlohmann::json MiningStatsToJson(const MiningStats& stats);

// {"anchor", "positive", "negative", "pos_f1", "neg_f1"} per line; each side
// holds the context fields plus its gold lev and state.
void WritePairs(std::span<const TrainingPair> pairs, std::ostream& out);
std::vector<TrainingPair> ReadPairs(std::istream& in);

}  // namespace levdex

#endif  // LEVDEX_PAIR_MINING_H_
