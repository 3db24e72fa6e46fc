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

#include "levdex/retriever.h"

#include <algorithm>
#include <string>

#include "levdex/binary_io.h"
#include "levdex/error.h"
#include "levdex/random.h"

namespace levdex {

RetrievalMethod ParseRetrievalMethod(std::string_view name) {
  if (name == "none") return RetrievalMethod::kNone;
  if (name == "bm25") return RetrievalMethod::kBm25;
  if (name == "neural-untrained") return RetrievalMethod::kNeuralUntrained;
  if (name == "neural-finetuned" || name == "neural") return RetrievalMethod::kNeuralFinetuned;
  if (name == "random") return RetrievalMethod::kRandom;
  throw Error(ErrorCode::kConfigError, "unknown retrieval method '" + std::string(name) + "'");
}

const char* RetrievalMethodName(RetrievalMethod method) {
  switch (method) {
    case RetrievalMethod::kNone: return "none";
    case RetrievalMethod::kBm25: return "bm25";
    case RetrievalMethod::kNeuralUntrained: return "neural-untrained";
    case RetrievalMethod::kNeuralFinetuned: return "neural-finetuned";
    case RetrievalMethod::kRandom: return "random";
  }
  return "unknown";
}

std::vector<Retrieved> Bm25Retriever::Retrieve(
    const DialogueContext& ctx, int k, std::optional<std::string_view> exclude_dialogue) const {
  std::vector<Retrieved> out;
  for (const Bm25Hit& hit : index_.TopK(QueryText(ctx, format_), k, exclude_dialogue)) {
    out.push_back({hit.score, *hit.payload});
  }
  return out;
}

std::vector<Retrieved> RandomRetriever::Retrieve(
    const DialogueContext& ctx, int k, std::optional<std::string_view> exclude_dialogue) const {
  std::vector<std::size_t> allowed;
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    if (!exclude_dialogue || pool_[i].dialogue_id != *exclude_dialogue) allowed.push_back(i);
  }
  const std::string key = ctx.dialogue_id + "#" + std::to_string(ctx.turn_index);
  Rng rng(DeriveSeed(seed_, Fnv1a64(key)));
  std::vector<Retrieved> out;
  for (int i = 0; i < k && !allowed.empty(); ++i) {
    const std::size_t j = rng.Below(allowed.size());
    out.push_back({0.0, pool_[allowed[j]]});
    allowed.erase(allowed.begin() + static_cast<std::ptrdiff_t>(j));
  }
  return out;
}

double TopOneSlotF1(const Retriever& retriever, std::span<const ContextExample> queries) {
  if (queries.empty()) return 0.0;
  double total = 0.0;
  for (const ContextExample& q : queries) {
    const auto hits = retriever.Retrieve(q.context, 1, q.context.dialogue_id);
    if (!hits.empty()) total += SlotF1(q.gold_lev, hits.front().payload.lev);
  }
  return total / static_cast<double>(queries.size());
}

}  // namespace levdex
