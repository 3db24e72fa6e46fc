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

#include "levdex/dual_encoder.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <utility>

#include "levdex/binary_io.h"
#include "levdex/error.h"
#include "levdex/random.h"
#include "levdex/tokenizer.h"

namespace levdex {
namespace {

constexpr std::string_view kMagic = "LVDXDENC";
constexpr std::uint32_t kVersion = 1;

void WriteMatrix(BinaryWriter& w, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.WriteF64(m(r, c));
  }
}

void ReadMatrix(BinaryReader& r, Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.ReadF64();
  }
}

void WriteTower(BinaryWriter& w, const EncoderParams& p) {
  WriteMatrix(w, p.embedding);
  WriteMatrix(w, p.proj_w);
  w.WriteF64s({p.proj_b.data(), static_cast<std::size_t>(p.proj_b.size())});
}

EncoderParams ReadTower(BinaryReader& r, int vocab_size, int dim) {
  EncoderParams p = EncoderParams::Zeros(vocab_size, dim);
  ReadMatrix(r, p.embedding);
  ReadMatrix(r, p.proj_w);
  r.ReadF64s({p.proj_b.data(), static_cast<std::size_t>(p.proj_b.size())});
  if (!p.AllFinite()) throw Error(ErrorCode::kNonFinite, "encoder file holds non-finite values");
  return p;
}

// Row-stacked mean-pooled embeddings of token lists.
Eigen::MatrixXd PoolRows(const EncoderParams& params,
                         const std::vector<const std::vector<int>*>& texts) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(texts.size()), params.dim());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = Pool(params, *texts[i]).transpose();
  }
  return out;
}

// Backprop of rows = pooled * W^T + b into `grad`, given d(loss)/d(rows).
void TowerBackward(const EncoderParams& params, const std::vector<const std::vector<int>*>& texts,
                   const Eigen::MatrixXd& pooled, const Eigen::MatrixXd& d_rows,
                   EncoderParams& grad) {
  grad.proj_w.noalias() += d_rows.transpose() * pooled;
  grad.proj_b += d_rows.colwise().sum().transpose();
  const Eigen::MatrixXd d_pooled = d_rows * params.proj_w;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const std::vector<int>& ids = *texts[i];
    if (ids.empty()) continue;
    const double inv = 1.0 / static_cast<double>(ids.size());
    for (int id : ids) grad.embedding.row(id) += inv * d_pooled.row(static_cast<Eigen::Index>(i));
  }
}

std::vector<ParamBlock> Blocks(EncoderParams& value, const EncoderParams& grad) {
  return {{value.embedding.data(), grad.embedding.data(),
           static_cast<std::size_t>(value.embedding.size())},
          {value.proj_w.data(), grad.proj_w.data(), static_cast<std::size_t>(value.proj_w.size())},
          {value.proj_b.data(), grad.proj_b.data(), static_cast<std::size_t>(value.proj_b.size())}};
}

}  // namespace

Vocab::Vocab() : tokens_{std::string(kUnkToken)}, ids_{{std::string(kUnkToken), kUnk}} {}

Vocab Vocab::FromTokens(std::vector<std::string> tokens) {
  std::set<std::string> sorted(std::make_move_iterator(tokens.begin()),
                               std::make_move_iterator(tokens.end()));
  sorted.erase(std::string(kUnkToken));
  Vocab v;
  v.tokens_.clear();
  v.ids_.clear();
  v.tokens_.emplace_back(kUnkToken);
  v.tokens_.insert(v.tokens_.end(), sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) v.ids_[v.tokens_[i]] = static_cast<int>(i);
  return v;
}

Vocab Vocab::Build(std::span<const std::string> texts) {
  std::vector<std::string> tokens = {std::string(kEosL1), std::string(kEosL2), std::string(kEosL3),
                                     std::string(kEosB),  std::string(kEosU1), std::string(kEosR),
                                     std::string(kEosU)};
  for (const std::string& text : texts) {
    for (std::string& t : Tokenize(text)) tokens.push_back(std::move(t));
  }
  return FromTokens(std::move(tokens));
}

int Vocab::Id(std::string_view token) const {
  const auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<int> Vocab::Ids(std::string_view text) const {
  std::vector<int> ids;
  for (const std::string& t : Tokenize(text)) ids.push_back(Id(t));
  return ids;
}

bool EncoderParams::AllFinite() const {
  return embedding.allFinite() && proj_w.allFinite() && proj_b.allFinite();
}

void EncoderParams::SetZero() {
  embedding.setZero();
  proj_w.setZero();
  proj_b.setZero();
}

EncoderParams EncoderParams::Zeros(int vocab_size, int dim) {
  EncoderParams p;
  p.embedding = Eigen::MatrixXd::Zero(vocab_size, dim);
  p.proj_w = Eigen::MatrixXd::Zero(dim, dim);
  p.proj_b = Eigen::VectorXd::Zero(dim);
  return p;
}

EncoderParams EncoderParams::Random(int vocab_size, int dim, std::uint64_t seed) {
  if (vocab_size < 1 || dim < 1) {
    throw Error(ErrorCode::kInvalidArgument, "encoder needs a vocabulary and dim >= 1");
  }
  Rng rng(seed);
  EncoderParams p = Zeros(vocab_size, dim);
  for (Eigen::Index r = 0; r < p.embedding.rows(); ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) p.embedding(r, c) = rng.Uniform(-0.1, 0.1);
  }
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      p.proj_w(r, c) = (r == c ? 0.5 : 0.0) + rng.Uniform(-0.01, 0.01);
    }
  }
  return p;
}

bool operator==(const EncoderParams& a, const EncoderParams& b) {
  auto same = [](const auto& x, const auto& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
  };
  return same(a.embedding, b.embedding) && same(a.proj_w, b.proj_w) && same(a.proj_b, b.proj_b);
}

Eigen::VectorXd Pool(const EncoderParams& params, std::span<const int> ids) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(params.dim());
  if (ids.empty()) return sum;
  for (int id : ids) sum += params.embedding.row(id).transpose();
  return sum / static_cast<double>(ids.size());
}

Eigen::VectorXd Encode(const EncoderParams& params, std::span<const int> ids) {
  return params.proj_w * Pool(params, ids) + params.proj_b;
}

double Similarity(const Eigen::VectorXd& q, const Eigen::VectorXd& k) {
  if (q.size() != k.size()) {
    throw Error(ErrorCode::kDimMismatch, "similarity of " + std::to_string(q.size()) + " and " +
                                             std::to_string(k.size()) + " dims");
  }
  return q.dot(k);
}

BatchLossResult BatchLoss(const EncoderParams& query, const EncoderParams& key,
                          std::span<const EncodedPair> batch, const LossOptions& options,
                          bool with_gradients) {
  if (query.dim() != key.dim()) throw Error(ErrorCode::kDimMismatch, "tower dims differ");
  if (batch.empty()) throw Error(ErrorCode::kInvalidArgument, "empty batch");
  const auto b = static_cast<Eigen::Index>(batch.size());
  std::vector<const std::vector<int>*> anchors;
  std::vector<const std::vector<int>*> keys;
  for (const EncodedPair& p : batch) {
    anchors.push_back(&p.anchor);
    keys.push_back(&p.positive);
  }
  for (const EncodedPair& p : batch) keys.push_back(&p.negative);

  const Eigen::MatrixXd pa = PoolRows(query, anchors);
  const Eigen::MatrixXd pk = PoolRows(key, keys);
  const Eigen::MatrixXd q = (pa * query.proj_w.transpose()).rowwise() + query.proj_b.transpose();
  const Eigen::MatrixXd k = (pk * key.proj_w.transpose()).rowwise() + key.proj_b.transpose();
  const Eigen::MatrixXd s = q * k.transpose();  // B x 2B

  // g holds d(loss)/d(s): (softmax - onehot) / B over the allowed columns.
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(b, 2 * b);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    auto allowed = [&](Eigen::Index j) { return options.in_batch_negatives || j == i || j == b + i; };
    double m = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < 2 * b; ++j) {
      if (allowed(j)) m = std::max(m, s(i, j));
    }
    double z = 0.0;
    for (Eigen::Index j = 0; j < 2 * b; ++j) {
      if (allowed(j)) z += std::exp(s(i, j) - m);
    }
    const double lse = m + std::log(z);
    loss += lse - s(i, i);
    for (Eigen::Index j = 0; j < 2 * b; ++j) {
      if (allowed(j)) g(i, j) = std::exp(s(i, j) - lse);
    }
    g(i, i) -= 1.0;
  }
  loss /= static_cast<double>(b);
  if (!std::isfinite(loss)) throw Error(ErrorCode::kNonFinite, "contrastive loss is not finite");

  BatchLossResult result;
  result.loss = loss;
  if (!with_gradients) return result;
  g /= static_cast<double>(b);
  result.grad_query = EncoderParams::Zeros(static_cast<int>(query.embedding.rows()), query.dim());
  result.grad_key = EncoderParams::Zeros(static_cast<int>(key.embedding.rows()), key.dim());
  TowerBackward(query, anchors, pa, g * k, result.grad_query);
  TowerBackward(key, keys, pk, g.transpose() * q, result.grad_key);
  return result;
}

Eigen::VectorXd DualEncoder::EncodeQuery(std::string_view text) const {
  return Encode(query, vocab.Ids(text));
}

Eigen::VectorXd DualEncoder::EncodeKey(std::string_view text) const {
  return Encode(key, vocab.Ids(text));
}

std::uint64_t DualEncoder::KeyFingerprint() const {
  BinaryWriter w;
  for (const std::string& t : vocab.tokens()) w.WriteString(t);
  WriteTower(w, key);
  return Fnv1a64(w.bytes());
}

std::string DualEncoder::Serialize() const {
  BinaryWriter w;
  w.WriteMagic(kMagic, kVersion);
  w.WriteU32(static_cast<std::uint32_t>(vocab.size()));
  for (const std::string& t : vocab.tokens()) w.WriteString(t);
  w.WriteU32(static_cast<std::uint32_t>(dim()));
  WriteTower(w, query);
  WriteTower(w, key);
  return w.bytes();
}

DualEncoder DualEncoder::Deserialize(std::string bytes) {
  BinaryReader r(std::move(bytes));
  r.ExpectMagic(kMagic, kVersion);
  const std::uint32_t n = r.ReadU32();
  std::vector<std::string> tokens;
  for (std::uint32_t i = 0; i < n; ++i) tokens.push_back(r.ReadString());
  DualEncoder e;
  e.vocab = Vocab::FromTokens(tokens);
  if (e.vocab.tokens() != tokens) throw Error(ErrorCode::kIoError, "encoder vocabulary is not canonical");
  const std::uint32_t dim = r.ReadU32();
  if (dim == 0 || dim > 4096) throw Error(ErrorCode::kIoError, "bad encoder dim");
  e.query = ReadTower(r, static_cast<int>(n), static_cast<int>(dim));
  e.key = ReadTower(r, static_cast<int>(n), static_cast<int>(dim));
  r.ExpectEnd();
  return e;
}

void DualEncoder::Save(const std::string& path) const { WriteStringToFile(path, Serialize()); }

DualEncoder DualEncoder::Load(const std::string& path) {
  return Deserialize(ReadFileToString(path));
}

DualEncoder InitDualEncoder(Vocab vocab, int dim, std::uint64_t seed) {
  DualEncoder e;
  e.query = EncoderParams::Random(vocab.size(), dim, seed);
  e.key = e.query;
  e.vocab = std::move(vocab);
  return e;
}

std::vector<EncodedPair> EncodePairs(const Vocab& vocab, std::span<const TrainingPair> pairs,
                                     const ContextOptions& format) {
  std::vector<EncodedPair> out;
  out.reserve(pairs.size());
  for (const TrainingPair& p : pairs) {
    out.push_back({vocab.Ids(QueryText(p.anchor.context, format).text),
                   vocab.Ids(KeyText(p.positive, format).text),
                   vocab.Ids(KeyText(p.negative, format).text)});
  }
  return out;
}

Vocab ContextVocab(std::span<const ContextExample> examples, const ContextOptions& format) {
  std::vector<std::string> texts;
  texts.reserve(2 * examples.size());
  for (const ContextExample& ex : examples) {
    texts.push_back(QueryText(ex.context, format).text);
    texts.push_back(KeyText(ex, format).text);
  }
  return Vocab::Build(texts);
}

double DatasetLoss(const DualEncoder& encoder, std::span<const EncodedPair> data, int batch_size,
                   const LossOptions& options) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t start = 0; start < data.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t n = std::min(static_cast<std::size_t>(batch_size), data.size() - start);
    total += static_cast<double>(n) *
             BatchLoss(encoder.query, encoder.key, data.subspan(start, n), options, false).loss;
  }
  return total / static_cast<double>(data.size());
}

EncoderTrainResult TrainDualEncoder(DualEncoder init, std::span<const EncodedPair> data,
                                    const EncoderTrainConfig& cfg) {
  if (data.empty()) throw Error(ErrorCode::kInvalidArgument, "no training pairs");
  if (cfg.batch_size < 1 || cfg.epochs < 0) {
    throw Error(ErrorCode::kConfigError, "batch_size must be >= 1 and epochs >= 0");
  }
  const LossOptions loss_options{cfg.in_batch_negatives};
  EncoderTrainResult result{std::move(init), {}};
  DualEncoder& enc = result.encoder;
  EncoderParams gq = EncoderParams::Zeros(enc.vocab.size(), enc.dim());
  EncoderParams gk = gq;
  auto blocks = [&] {
    std::vector<ParamBlock> all = Blocks(enc.query, gq);
    for (const ParamBlock& p : Blocks(enc.key, gk)) all.push_back(p);
    return all;
  };
  Optimizer optimizer({.kind = cfg.optimizer, .learning_rate = cfg.learning_rate}, blocks());

  result.loss_curve.push_back(DatasetLoss(enc, data, cfg.batch_size, loss_options));
  Rng rng(DeriveSeed(cfg.seed, 0x656e63));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<EncodedPair> batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.Shuffle(order);
    int step = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size), ++step) {
      batch.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + cfg.batch_size); ++i) {
        batch.push_back(data[order[i]]);
      }
      BatchLossResult r;
      try {
        r = BatchLoss(enc.query, enc.key, batch, loss_options);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNonFinite) throw;
        throw Error(ErrorCode::kNonFinite, "epoch " + std::to_string(epoch) + " step " +
                                               std::to_string(step) + ": non-finite loss");
      }
      gq = std::move(r.grad_query);
      gk = std::move(r.grad_key);
      optimizer.Step(blocks());
    }
    result.loss_curve.push_back(DatasetLoss(enc, data, cfg.batch_size, loss_options));
  }
  return result;
}

}  // namespace levdex
