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

#ifndef LEVDEX_SEQ2SEQ_H_
#define LEVDEX_SEQ2SEQ_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "levdex/dual_encoder.h"
#include "levdex/optim.h"

namespace levdex {

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";

// Whitespace split with ',' always split off and a trailing '.', '?' or '!'
// split off a word. No case folding.
std::vector<std::string> GenTokenize(std::string_view text);
// Joins with single spaces and reattaches commas.
std::string GenDetokenize(std::span<const std::string> tokens);

struct Seq2SeqDims {
  int vocab = 0;
  int emb = 64;
  int hidden = 64;  // per encoder direction
  int dec = 64;
  int att = 64;

  int memory() const { return 2 * hidden + emb; }
  friend bool operator==(const Seq2SeqDims&, const Seq2SeqDims&) = default;
};

// Bidirectional tanh RNN encoder with memory m_j = [f_j; b_j; x_j], tanh RNN
// decoder fed [emb(y_{t-1}); c_{t-1}], additive attention
// e_j = v . tanh(att_m m_j + att_b + att_s s_t), output out_w [s_t; c_t] + out_b.
struct Seq2SeqParams {
  Eigen::MatrixXd emb;       // V x E
  Eigen::MatrixXd fw_x, fw_h;
  Eigen::VectorXd fw_b;
  Eigen::MatrixXd bw_x, bw_h;
  Eigen::VectorXd bw_b;
  Eigen::MatrixXd init_w;    // D x 2H, applied to [f_n; b_1]
  Eigen::VectorXd init_b;
  Eigen::MatrixXd dec_x;     // D x (E + M)
  Eigen::MatrixXd dec_h;     // D x D
  Eigen::VectorXd dec_b;
  Eigen::MatrixXd att_m;     // A x M
  Eigen::VectorXd att_b;
  Eigen::MatrixXd att_s;     // A x D
  Eigen::VectorXd att_v;
  Eigen::MatrixXd out_w;     // V x (D + M)
  Eigen::VectorXd out_b;

  static Seq2SeqParams Zeros(const Seq2SeqDims& dims);
  // Uniform(-r, r) with r = 1 / sqrt(fan_in) for weights, zero biases.
  static Seq2SeqParams Random(const Seq2SeqDims& dims, std::uint64_t seed);

  Seq2SeqDims dims() const;
  bool AllFinite() const;

  // Visits every block in a fixed order.
  template <typename F>
  void ForEach(F&& f) {
    f(emb); f(fw_x); f(fw_h); f(fw_b); f(bw_x); f(bw_h); f(bw_b); f(init_w); f(init_b);
    f(dec_x); f(dec_h); f(dec_b); f(att_m); f(att_b); f(att_s); f(att_v); f(out_w); f(out_b);
  }
  template <typename F>
  void ForEach(F&& f) const {
    f(emb); f(fw_x); f(fw_h); f(fw_b); f(bw_x); f(bw_h); f(bw_b); f(init_w); f(init_b);
    f(dec_x); f(dec_h); f(dec_b); f(att_m); f(att_b); f(att_s); f(att_v); f(out_w); f(out_b);
  }

  friend bool operator==(const Seq2SeqParams& a, const Seq2SeqParams& b);
};

// Token ids of one training or decoding instance. Targets before loss_from
// are forced and carry no loss.
struct Seq2SeqExample {
  std::vector<int> source;
  int bos = 0;              // first decoder input
  std::vector<int> target;  // ends with the end token
  int loss_from = 0;
};

// Summed cross-entropy of the scored targets under teacher forcing. With a
// non-null grad, adds scale times its gradient. Throws NONFINITE.
double Seq2SeqLoss(const Seq2SeqParams& params, const Seq2SeqExample& example,
                   Seq2SeqParams* grad = nullptr, double scale = 1.0);

// Feeds `forced` first, then greedy argmax (lowest id on ties) until `eos` or
// max_tokens emitted tokens. Returns only the emitted tokens, eos excluded.
std::vector<int> GreedyDecode(const Seq2SeqParams& params, std::span<const int> source,
                              std::span<const int> forced, int bos, int eos, int max_tokens);

struct Seq2SeqModel {
  Vocab vocab;
  Seq2SeqParams params;

  int bos() const { return vocab.Id(kBos); }
  int eos() const { return vocab.Id(kEos); }
  std::vector<int> Ids(std::span<const std::string> tokens) const;

  std::string Serialize() const;
  static Seq2SeqModel Deserialize(std::string bytes);
  void Save(const std::string& path) const;
  static Seq2SeqModel Load(const std::string& path);

  friend bool operator==(const Seq2SeqModel&, const Seq2SeqModel&) = default;
};

struct Seq2SeqTrainConfig {
  Seq2SeqDims dims;  // vocab filled in from the model
  double learning_rate = 0.01;
  int batch_size = 16;
  int epochs = 12;
  std::uint64_t seed = 1;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double clip_norm = 5.0;
  // Scales the rate linearly from 1 down to 1/epochs over the epochs.
  bool linear_decay = true;
};

struct Seq2SeqTrainResult {
  Seq2SeqModel model;
  std::vector<double> loss_curve;  // mean per-token loss of each epoch
};

// Minibatch training from `init`; the loss of a batch is averaged over its
// scored tokens. Throws NONFINITE naming the epoch and step.
Seq2SeqTrainResult TrainSeq2Seq(Seq2SeqModel init, std::span<const Seq2SeqExample> data,
                                const Seq2SeqTrainConfig& cfg);

}  // namespace levdex

#endif  // LEVDEX_SEQ2SEQ_H_
