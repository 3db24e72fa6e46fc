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

#ifndef LEVDEX_BM25_H_
#define LEVDEX_BM25_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "levdex/corpus.h"
#include "levdex/dialogue.h"

namespace levdex {

struct Bm25Params {
  double k1 = 0.9;
  double b = 0.4;

  friend bool operator==(const Bm25Params&, const Bm25Params&) = default;
};

// What a hit resolves to: the gold delta of the indexed turn and where the
// turn came from.
struct DocPayload {
  LevSpan lev;
  std::string dialogue_id;
  int turn_index = 0;

  friend bool operator==(const DocPayload&, const DocPayload&) = default;
};

struct Bm25Document {
  std::int64_t doc_id = 0;
  SerializedContext context;
  DocPayload payload;
};

struct Bm25Hit {
  double score = 0.0;
  std::int64_t doc_id = 0;
  const DocPayload* payload = nullptr;  // owned by the index
};

// Okapi BM25 over tokenized serialized contexts:
//   score(q, d) = sum_t qtf(t) * idf(t) * tf(t,d) * (k1 + 1)
//                 / (tf(t,d) + k1 * (1 - b + b * |d| / avgdl))
//   idf(t) = ln(1 + (N - df(t) + 0.5) / (df(t) + 0.5))
// Repeated query terms count once per occurrence, as with a bag of
// disjunctive term clauses.
class Bm25Index {
 public:
  struct Posting {
    std::uint32_t doc = 0;  // position in build order
    std::uint32_t tf = 0;

    friend bool operator==(const Posting&, const Posting&) = default;
  };

  Bm25Index() = default;

  // Throws DUPLICATE_DOC on repeated ids and INVALID_ARGUMENT on k1 <= 0 or
  // b outside [0, 1].
  static Bm25Index Build(std::vector<Bm25Document> docs, Bm25Params params = {});

  // At most k hits with positive score, by descending score then ascending
  // doc_id. Documents of exclude_dialogue are skipped.
  std::vector<Bm25Hit> TopK(const SerializedContext& query, int k,
                            std::optional<std::string_view> exclude_dialogue = std::nullopt) const;

  double Idf(std::string_view term) const;
  std::size_t DocFrequency(std::string_view term) const;

  std::size_t n_docs() const { return doc_ids_.size(); }
  double avg_doc_length() const { return avg_doc_length_; }
  const Bm25Params& params() const { return params_; }
  const std::map<std::string, std::vector<Posting>, std::less<>>& postings() const {
    return postings_;
  }
  std::uint32_t doc_length(std::size_t doc) const { return doc_lengths_[doc]; }
  std::int64_t doc_id(std::size_t doc) const { return doc_ids_[doc]; }
  const DocPayload& payload(std::size_t doc) const { return payloads_[doc]; }

  std::string Serialize() const;
  static Bm25Index Deserialize(std::string bytes);
  void Save(const std::string& path) const;
  static Bm25Index Load(const std::string& path);

  friend bool operator==(const Bm25Index&, const Bm25Index&) = default;

 private:
  Bm25Params params_;
  std::vector<std::int64_t> doc_ids_;
  std::vector<std::uint32_t> doc_lengths_;
  std::vector<DocPayload> payloads_;
  std::map<std::string, std::vector<Posting>, std::less<>> postings_;
  double avg_doc_length_ = 0.0;
};

// One document per example, doc_id = position, text = KeyText.
std::vector<Bm25Document> Bm25Documents(std::span<const ContextExample> examples,
                                        const ContextOptions& options);

}  // namespace levdex

#endif  // LEVDEX_BM25_H_
