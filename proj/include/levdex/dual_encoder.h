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

#ifndef LEVDEX_DUAL_ENCODER_H_
#define LEVDEX_DUAL_ENCODER_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "levdex/corpus.h"
#include "levdex/optim.h"
#include "levdex/pair_mining.h"

namespace levdex {

// Token inventory shared by both towers. Id 0 is the unknown token; the rest
// are sorted.
class Vocab {
 public:
  static constexpr int kUnk = 0;
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocab();
  // Every token of `texts` plus the separator tokens.
  static Vocab Build(std::span<const std::string> texts);
  static Vocab FromTokens(std::vector<std::string> tokens);

  int Id(std::string_view token) const;
  std::vector<int> Ids(std::string_view text) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int, std::less<>> ids_;
};

// One tower: v = proj_w * mean(embedding rows of the tokens) + proj_b.
struct EncoderParams {
  Eigen::MatrixXd embedding;  // |V| x d
  Eigen::MatrixXd proj_w;     // d x d
  Eigen::VectorXd proj_b;     // d

  int dim() const { return static_cast<int>(proj_b.size()); }
  bool AllFinite() const;
  void SetZero();

  static EncoderParams Zeros(int vocab_size, int dim);
  // Embeddings uniform in (-0.1, 0.1), projection 0.5 I plus uniform noise
  // in (-0.01, 0.01), zero bias.
  static EncoderParams Random(int vocab_size, int dim, std::uint64_t seed);

  friend bool operator==(const EncoderParams& a, const EncoderParams& b);
};

// Mean of the embedding rows; the zero vector for no tokens.
Eigen::VectorXd Pool(const EncoderParams& params, std::span<const int> ids);
Eigen::VectorXd Encode(const EncoderParams& params, std::span<const int> ids);

// Dot product. Throws DIM_MISMATCH on unequal sizes.
double Similarity(const Eigen::VectorXd& q, const Eigen::VectorXd& k);

// Token ids of the three texts of a training pair.
struct EncodedPair {
  std::vector<int> anchor;
  std::vector<int> positive;
  std::vector<int> negative;
};

struct LossOptions {
  // When false each anchor only sees its own explicit negative.
  bool in_batch_negatives = true;
};

struct BatchLossResult {
  double loss = 0.0;
  EncoderParams grad_query;
  EncoderParams grad_key;
};

// Contrastive loss over a batch. Anchor i scores its own positive against
// its own negative and, with in-batch negatives, every positive and negative
// of the other instances (2B - 1 negatives). The loss is the mean of
// -log softmax at the positive. Throws NONFINITE on a non-finite loss.
BatchLossResult BatchLoss(const EncoderParams& query, const EncoderParams& key,
                          std::span<const EncodedPair> batch, const LossOptions& options = {},
                          bool with_gradients = true);

struct EncoderTrainConfig {
  int dim = 64;
  double learning_rate = 0.05;
  int batch_size = 16;
  int epochs = 30;
  std::uint64_t seed = 1;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  bool in_batch_negatives = true;
};

// Vocabulary plus query and key towers.
struct DualEncoder {
  Vocab vocab;
  EncoderParams query;
  EncoderParams key;

  int dim() const { return query.dim(); }
  Eigen::VectorXd EncodeQuery(std::string_view text) const;
  Eigen::VectorXd EncodeKey(std::string_view text) const;
  // Hash of the vocabulary and the key tower.
  std::uint64_t KeyFingerprint() const;

  std::string Serialize() const;
  static DualEncoder Deserialize(std::string bytes);
  void Save(const std::string& path) const;
  static DualEncoder Load(const std::string& path);

  friend bool operator==(const DualEncoder&, const DualEncoder&) = default;
};

// Both towers start from the same draw, so an untrained encoder scores by
// shared tokens rather than noise.
DualEncoder InitDualEncoder(Vocab vocab, int dim, std::uint64_t seed);

// Anchor as a query, positive and negative as keys.
std::vector<EncodedPair> EncodePairs(const Vocab& vocab, std::span<const TrainingPair> pairs,
                                     const ContextOptions& format);

// Vocabulary over the query and key texts of the examples.
Vocab ContextVocab(std::span<const ContextExample> examples, const ContextOptions& format);

// Mean loss over consecutive batches of the given size, in order.
double DatasetLoss(const DualEncoder& encoder, std::span<const EncodedPair> data, int batch_size,
                   const LossOptions& options = {});

struct EncoderTrainResult {
  DualEncoder encoder;
  // Dataset loss before training, then after every epoch.
  std::vector<double> loss_curve;
};

// Trains both towers in place from `init`. Deterministic given cfg.seed.
// Throws NONFINITE naming the epoch and step.
EncoderTrainResult TrainDualEncoder(DualEncoder init, std::span<const EncodedPair> data,
                                    const EncoderTrainConfig& cfg);

}  // namespace levdex

#endif  // LEVDEX_DUAL_ENCODER_H_
