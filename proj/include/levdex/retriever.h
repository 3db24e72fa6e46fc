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

#ifndef LEVDEX_RETRIEVER_H_
#define LEVDEX_RETRIEVER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "levdex/bm25.h"
#include "levdex/dual_encoder.h"
#include "levdex/neural_index.h"

namespace levdex {

enum class RetrievalMethod { kNone, kBm25, kNeuralUntrained, kNeuralFinetuned, kRandom };

RetrievalMethod ParseRetrievalMethod(std::string_view name);
const char* RetrievalMethodName(RetrievalMethod method);

// Source of retrieved lev spans for a context. Implementations are immutable
// after construction and safe to share.
class Retriever {
 public:
  virtual ~Retriever() = default;
  virtual std::vector<Retrieved> Retrieve(
      const DialogueContext& ctx, int k,
      std::optional<std::string_view> exclude_dialogue) const = 0;
};

class NoRetriever final : public Retriever {
 public:
  std::vector<Retrieved> Retrieve(const DialogueContext&, int,
                                  std::optional<std::string_view>) const override {
    return {};
  }
};

class Bm25Retriever final : public Retriever {
 public:
  Bm25Retriever(const Bm25Index& index, ContextOptions format) : index_(index), format_(format) {}
  std::vector<Retrieved> Retrieve(const DialogueContext& ctx, int k,
                                  std::optional<std::string_view> exclude_dialogue) const override;

 private:
  const Bm25Index& index_;
  ContextOptions format_;
};

class NeuralRetriever final : public Retriever {
 public:
  NeuralRetriever(const NeuralIndex& index, const DualEncoder& encoder)
      : index_(index), encoder_(encoder) {}
  std::vector<Retrieved> Retrieve(const DialogueContext& ctx, int k,
                                  std::optional<std::string_view> exclude_dialogue) const override {
    return index_.Query(encoder_, ctx, k, exclude_dialogue);
  }

 private:
  const NeuralIndex& index_;
  const DualEncoder& encoder_;
};

// Uniform draws without replacement, seeded per (dialogue_id, turn_index) so
// that results do not depend on query order.
class RandomRetriever final : public Retriever {
 public:
  RandomRetriever(std::vector<DocPayload> pool, std::uint64_t seed)
      : pool_(std::move(pool)), seed_(seed) {}
  std::vector<Retrieved> Retrieve(const DialogueContext& ctx, int k,
                                  std::optional<std::string_view> exclude_dialogue) const override;

 private:
  std::vector<DocPayload> pool_;
  std::uint64_t seed_;
};

// Mean slot F1 between the top-1 retrieved span and the gold span, with the
// query's own dialogue excluded. Queries with no result score 0.
double TopOneSlotF1(const Retriever& retriever, std::span<const ContextExample> queries);

}  // namespace levdex

#endif  // LEVDEX_RETRIEVER_H_
