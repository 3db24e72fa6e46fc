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
#include <set>
#include <utility>

#include "levdex/binary_io.h"
#include "levdex/error.h"
#include "levdex/tokenizer.h"

namespace levdex {
namespace {

constexpr std::string_view kMagic = "LVDXBM25";
constexpr std::uint32_t kVersion = 1;

}  // namespace

Bm25Index Bm25Index::Build(std::vector<Bm25Document> docs, Bm25Params params) {
  if (!(params.k1 > 0.0) || !(params.b >= 0.0 && params.b <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bm25 requires k1 > 0 and 0 <= b <= 1");
  }
  Bm25Index index;
  index.params_ = params;
  std::set<std::int64_t> seen;
  std::uint64_t total_length = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (!seen.insert(docs[d].doc_id).second) {
      throw Error(ErrorCode::kDuplicateDoc, "doc_id " + std::to_string(docs[d].doc_id));
    }
    const std::vector<std::string> tokens = Tokenize(docs[d].context.text);
    std::map<std::string, std::uint32_t, std::less<>> tf;
    for (const std::string& t : tokens) ++tf[t];
    for (const auto& [term, count] : tf) {
      index.postings_[term].push_back({static_cast<std::uint32_t>(d), count});
    }
    index.doc_ids_.push_back(docs[d].doc_id);
    index.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
    index.payloads_.push_back(std::move(docs[d].payload));
    total_length += tokens.size();
  }
  index.avg_doc_length_ =
      docs.empty() ? 0.0 : static_cast<double>(total_length) / static_cast<double>(docs.size());
  return index;
}

std::size_t Bm25Index::DocFrequency(std::string_view term) const {
  const auto it = postings_.find(term);
  return it == postings_.end() ? 0 : it->second.size();
}

double Bm25Index::Idf(std::string_view term) const {
  const double n = static_cast<double>(n_docs());
  const double df = static_cast<double>(DocFrequency(term));
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

std::vector<Bm25Hit> Bm25Index::TopK(const SerializedContext& query, int k,
                                     std::optional<std::string_view> exclude_dialogue) const {
  std::vector<Bm25Hit> hits;
  if (k <= 0 || n_docs() == 0) return hits;
  std::map<std::string, int, std::less<>> query_tf;
  for (std::string& t : Tokenize(query.text)) ++query_tf[std::move(t)];

  std::vector<double> scores(n_docs(), 0.0);
  std::vector<bool> touched(n_docs(), false);
  const double k1 = params_.k1;
  const double b = params_.b;
  for (const auto& [term, qtf] : query_tf) {
    const auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double idf = Idf(term);
    for (const Posting& p : it->second) {
      const double tf = static_cast<double>(p.tf);
      const double norm = 1.0 - b + b * static_cast<double>(doc_lengths_[p.doc]) / avg_doc_length_;
      scores[p.doc] += static_cast<double>(qtf) * idf * tf * (k1 + 1.0) / (tf + k1 * norm);
      touched[p.doc] = true;
    }
  }
  for (std::size_t d = 0; d < n_docs(); ++d) {
    if (!touched[d] || !(scores[d] > 0.0)) continue;
    if (exclude_dialogue && payloads_[d].dialogue_id == *exclude_dialogue) continue;
    hits.push_back({scores[d], doc_ids_[d], &payloads_[d]});
  }
  auto better = [](const Bm25Hit& a, const Bm25Hit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  };
  const std::size_t keep = std::min(hits.size(), static_cast<std::size_t>(k));
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(),
                    better);
  hits.resize(keep);
  return hits;
}

std::string Bm25Index::Serialize() const {
  BinaryWriter w;
  w.WriteMagic(kMagic, kVersion);
  w.WriteF64(params_.k1);
  w.WriteF64(params_.b);
  w.WriteU64(n_docs());
  for (std::size_t d = 0; d < n_docs(); ++d) {
    w.WriteI64(doc_ids_[d]);
    w.WriteU32(doc_lengths_[d]);
    w.WriteString(payloads_[d].dialogue_id);
    w.WriteU32(static_cast<std::uint32_t>(payloads_[d].turn_index));
    w.WriteString(SerializeState(payloads_[d].lev));
  }
  w.WriteU64(postings_.size());
  for (const auto& [term, list] : postings_) {
    w.WriteString(term);
    w.WriteU32(static_cast<std::uint32_t>(list.size()));
    for (const Posting& p : list) {
      w.WriteU32(p.doc);
      w.WriteU32(p.tf);
    }
  }
  return w.bytes();
}

Bm25Index Bm25Index::Deserialize(std::string bytes) {
  BinaryReader r(std::move(bytes));
  r.ExpectMagic(kMagic, kVersion);
  Bm25Index index;
  index.params_.k1 = r.ReadF64();
  index.params_.b = r.ReadF64();
  const std::uint64_t n = r.ReadU64();
  std::uint64_t total_length = 0;
  for (std::uint64_t d = 0; d < n; ++d) {
    index.doc_ids_.push_back(r.ReadI64());
    index.doc_lengths_.push_back(r.ReadU32());
    DocPayload payload;
    payload.dialogue_id = r.ReadString();
    payload.turn_index = static_cast<int>(r.ReadU32());
    payload.lev = ParseLevSpanStrict(r.ReadString());
    index.payloads_.push_back(std::move(payload));
    total_length += index.doc_lengths_.back();
  }
  const std::uint64_t n_terms = r.ReadU64();
  for (std::uint64_t t = 0; t < n_terms; ++t) {
    std::string term = r.ReadString();
    const std::uint32_t count = r.ReadU32();
    if (count > n) throw Error(ErrorCode::kIoError, "corrupt posting list");
    std::vector<Posting> list(count);
    for (Posting& p : list) {
      p.doc = r.ReadU32();
      p.tf = r.ReadU32();
      if (p.doc >= n) throw Error(ErrorCode::kIoError, "posting refers to unknown document");
    }
    index.postings_.emplace(std::move(term), std::move(list));
  }
  r.ExpectEnd();
  index.avg_doc_length_ =
      n == 0 ? 0.0 : static_cast<double>(total_length) / static_cast<double>(n);
  return index;
}

void Bm25Index::Save(const std::string& path) const { WriteStringToFile(path, Serialize()); }

Bm25Index Bm25Index::Load(const std::string& path) { return Deserialize(ReadFileToString(path)); }

std::vector<Bm25Document> Bm25Documents(std::span<const ContextExample> examples,
                                        const ContextOptions& options) {
  std::vector<Bm25Document> docs;
  docs.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const ContextExample& ex = examples[i];
    docs.push_back({static_cast<std::int64_t>(i), KeyText(ex, options),
                    {ex.gold_lev, ex.context.dialogue_id, ex.context.turn_index}});
  }
  return docs;
}

}  // namespace levdex
