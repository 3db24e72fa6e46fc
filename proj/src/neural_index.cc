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

#include <algorithm>
#include <tuple>
#include <utility>

#include "levdex/binary_io.h"
#include "levdex/error.h"

namespace levdex {
namespace {

constexpr std::string_view kMagic = "LVDXNIDX";
constexpr std::uint32_t kVersion = 1;

}  // namespace

NeuralIndex NeuralIndex::Build(const DualEncoder& encoder,
                               std::span<const ContextExample> examples,
                               const ContextOptions& format) {
  std::vector<Eigen::VectorXd> keys;
  std::vector<DocPayload> payloads;
  keys.reserve(examples.size());
  payloads.reserve(examples.size());
  for (const ContextExample& ex : examples) {
    keys.push_back(encoder.EncodeKey(KeyText(ex, format).text));
    payloads.push_back({ex.gold_lev, ex.context.dialogue_id, ex.context.turn_index});
  }
  return FromKeys(std::move(keys), std::move(payloads), encoder.dim(), encoder.KeyFingerprint(),
                  format);
}

NeuralIndex NeuralIndex::FromKeys(std::vector<Eigen::VectorXd> keys,
                                  std::vector<DocPayload> payloads, int dim,
                                  std::uint64_t fingerprint, const ContextOptions& format) {
  if (keys.size() != payloads.size()) {
    throw Error(ErrorCode::kInvalidArgument, "keys and payloads differ in count");
  }
  NeuralIndex index;
  index.dim_ = dim;
  index.fingerprint_ = fingerprint;
  index.format_ = format;
  index.keys_.resize(static_cast<Eigen::Index>(keys.size()), dim);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (keys[i].size() != dim) {
      throw Error(ErrorCode::kDimMismatch, "key " + std::to_string(i) + " has " +
                                               std::to_string(keys[i].size()) + " dims, index " +
                                               std::to_string(dim));
    }
    if (!keys[i].allFinite()) throw Error(ErrorCode::kNonFinite, "non-finite key");
    index.keys_.row(static_cast<Eigen::Index>(i)) = keys[i].transpose();
  }
  index.payloads_ = std::move(payloads);
  return index;
}

std::vector<Retrieved> NeuralIndex::Query(const Eigen::VectorXd& query, int k,
                                          std::optional<std::string_view> exclude_dialogue) const {
  if (payloads_.empty()) throw Error(ErrorCode::kEmptyIndex, "neural index has no entries");
  if (query.size() != dim_) {
    throw Error(ErrorCode::kDimMismatch, "query has " + std::to_string(query.size()) +
                                             " dims, index " + std::to_string(dim_));
  }
  std::vector<Retrieved> out;
  if (k <= 0) return out;
  const Eigen::VectorXd scores = keys_ * query;
  std::vector<std::size_t> order;
  order.reserve(payloads_.size());
  for (std::size_t i = 0; i < payloads_.size(); ++i) {
    if (exclude_dialogue && payloads_[i].dialogue_id == *exclude_dialogue) continue;
    order.push_back(i);
  }
  auto better = [&](std::size_t a, std::size_t b) {
    const double sa = scores(static_cast<Eigen::Index>(a));
    const double sb = scores(static_cast<Eigen::Index>(b));
    if (sa != sb) return sa > sb;
    return std::tie(payloads_[a].dialogue_id, payloads_[a].turn_index) <
           std::tie(payloads_[b].dialogue_id, payloads_[b].turn_index);
  };
  const std::size_t keep = std::min(order.size(), static_cast<std::size_t>(k));
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    better);
  for (std::size_t i = 0; i < keep; ++i) {
    out.push_back({scores(static_cast<Eigen::Index>(order[i])), payloads_[order[i]]});
  }
  return out;
}

std::vector<Retrieved> NeuralIndex::Query(const DualEncoder& encoder, const DialogueContext& ctx,
                                          int k,
                                          std::optional<std::string_view> exclude_dialogue) const {
  return Query(encoder.EncodeQuery(QueryText(ctx, format_).text), k, exclude_dialogue);
}

std::string NeuralIndex::Serialize() const {
  BinaryWriter w;
  w.WriteMagic(kMagic, kVersion);
  w.WriteU32(static_cast<std::uint32_t>(dim_));
  w.WriteU64(payloads_.size());
  w.WriteU64(fingerprint_);
  w.WriteU32((format_.delex ? 1u : 0u) | (format_.include_prev_state ? 2u : 0u));
  for (std::size_t i = 0; i < payloads_.size(); ++i) {
    for (int j = 0; j < dim_; ++j) w.WriteF64(keys_(static_cast<Eigen::Index>(i), j));
    w.WriteString(SerializeState(payloads_[i].lev));
    w.WriteString(payloads_[i].dialogue_id);
    w.WriteU32(static_cast<std::uint32_t>(payloads_[i].turn_index));
  }
  return w.bytes();
}

NeuralIndex NeuralIndex::Deserialize(std::string bytes) {
  BinaryReader r(std::move(bytes));
  r.ExpectMagic(kMagic, kVersion);
  const std::uint32_t dim = r.ReadU32();
  const std::uint64_t n = r.ReadU64();
  const std::uint64_t fingerprint = r.ReadU64();
  const std::uint32_t flags = r.ReadU32();
  if (dim == 0 || dim > 4096 || flags > 3) throw Error(ErrorCode::kIoError, "bad index header");
  std::vector<Eigen::VectorXd> keys;
  std::vector<DocPayload> payloads;
  for (std::uint64_t i = 0; i < n; ++i) {
    Eigen::VectorXd key(dim);
    r.ReadF64s({key.data(), dim});
    keys.push_back(std::move(key));
    DocPayload p;
    p.lev = ParseLevSpanStrict(r.ReadString());
    p.dialogue_id = r.ReadString();
    p.turn_index = static_cast<int>(r.ReadU32());
    payloads.push_back(std::move(p));
  }
  r.ExpectEnd();
  return FromKeys(std::move(keys), std::move(payloads), static_cast<int>(dim), fingerprint,
                  {.delex = (flags & 1u) != 0, .include_prev_state = (flags & 2u) != 0});
}

void NeuralIndex::Save(const std::string& path) const { WriteStringToFile(path, Serialize()); }

NeuralIndex NeuralIndex::Load(const std::string& path) {
  return Deserialize(ReadFileToString(path));
}

bool operator==(const NeuralIndex& a, const NeuralIndex& b) {
  return a.dim_ == b.dim_ && a.fingerprint_ == b.fingerprint_ &&
         a.format_.delex == b.format_.delex &&
         a.format_.include_prev_state == b.format_.include_prev_state &&
         a.keys_.rows() == b.keys_.rows() && a.keys_ == b.keys_ && a.payloads_ == b.payloads_;
}

}  // namespace levdex
