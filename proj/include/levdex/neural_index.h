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

#ifndef LEVDEX_NEURAL_INDEX_H_
#define LEVDEX_NEURAL_INDEX_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "levdex/bm25.h"
#include "levdex/corpus.h"
#include "levdex/dual_encoder.h"

namespace levdex {

struct Retrieved {
  double score = 0.0;
  DocPayload payload;
};

// Exact inner-product search over key vectors of training turns.
class NeuralIndex {
 public:
  NeuralIndex() = default;

  // One entry per example, keyed on KeyText(example, format) under the key
  // tower, in example order.
  static NeuralIndex Build(const DualEncoder& encoder, std::span<const ContextExample> examples,
                           const ContextOptions& format);
  // Throws DIM_MISMATCH unless every key has `dim` entries.
  static NeuralIndex FromKeys(std::vector<Eigen::VectorXd> keys, std::vector<DocPayload> payloads,
                              int dim, std::uint64_t fingerprint, const ContextOptions& format);

  // Top k by descending score, ties by (dialogue_id, turn_index). Throws
  // EMPTY_INDEX on an index without entries and DIM_MISMATCH on a wrong query
  // size.
  std::vector<Retrieved> Query(const Eigen::VectorXd& query, int k,
                               std::optional<std::string_view> exclude_dialogue = std::nullopt) const;
  // Encodes QueryText(ctx, format()) with the query tower first. The encoder
  // is not checked against the fingerprint; see MatchesEncoder.
  std::vector<Retrieved> Query(const DualEncoder& encoder, const DialogueContext& ctx, int k,
                               std::optional<std::string_view> exclude_dialogue = std::nullopt) const;

  bool MatchesEncoder(const DualEncoder& encoder) const {
    return encoder.KeyFingerprint() == fingerprint_;
  }

  std::size_t size() const { return payloads_.size(); }
  int dim() const { return dim_; }
  std::uint64_t fingerprint() const { return fingerprint_; }
  const ContextOptions& format() const { return format_; }
  const Eigen::MatrixXd& keys() const { return keys_; }  // one row per entry
  const DocPayload& payload(std::size_t i) const { return payloads_[i]; }

  std::string Serialize() const;
  static NeuralIndex Deserialize(std::string bytes);
  void Save(const std::string& path) const;
  static NeuralIndex Load(const std::string& path);

  friend bool operator==(const NeuralIndex& a, const NeuralIndex& b);

 private:
  int dim_ = 0;
  std::uint64_t fingerprint_ = 0;
  ContextOptions format_;
  Eigen::MatrixXd keys_;
  std::vector<DocPayload> payloads_;
};

}  // namespace levdex

#endif  // LEVDEX_NEURAL_INDEX_H_
