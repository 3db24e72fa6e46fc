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

#include "levdex/seq2seq.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <utility>

#include "levdex/binary_io.h"
#include "levdex/error.h"
#include "levdex/random.h"

namespace levdex {
namespace {

constexpr std::string_view kMagic = "LVDXS2SQ";
constexpr std::uint32_t kVersion = 1;

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd Tanh(const MatrixXd& m) { return m.array().tanh().matrix(); }

// Encoder activations of one source sequence.
struct Encoded {
  std::vector<int> source;
  MatrixXd x;  // E x n
  MatrixXd f;  // H x n
  MatrixXd b;  // H x n
  MatrixXd m;  // M x n
  MatrixXd p;  // A x n, att_m m + att_b
  VectorXd h0;
  VectorXd s0;
};

Encoded RunEncoder(const Seq2SeqParams& w, std::span<const int> source) {
  Encoded enc;
  enc.source.assign(source.begin(), source.end());
  if (enc.source.empty()) enc.source.push_back(Vocab::kUnk);
  const auto n = static_cast<Eigen::Index>(enc.source.size());
  const auto e = w.emb.cols();
  const auto h = w.fw_h.rows();
  enc.x.resize(e, n);
  for (Eigen::Index j = 0; j < n; ++j) enc.x.col(j) = w.emb.row(enc.source[j]).transpose();
  const MatrixXd af = (w.fw_x * enc.x).colwise() + w.fw_b;
  const MatrixXd ab = (w.bw_x * enc.x).colwise() + w.bw_b;
  enc.f.resize(h, n);
  enc.b.resize(h, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    VectorXd a = af.col(j);
    if (j > 0) a.noalias() += w.fw_h * enc.f.col(j - 1);
    enc.f.col(j) = a.array().tanh();
  }
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    VectorXd a = ab.col(j);
    if (j + 1 < n) a.noalias() += w.bw_h * enc.b.col(j + 1);
    enc.b.col(j) = a.array().tanh();
  }
  enc.m.resize(2 * h + e, n);
  enc.m << enc.f, enc.b, enc.x;
  enc.p = (w.att_m * enc.m).colwise() + w.att_b;
  enc.h0.resize(2 * h);
  enc.h0 << enc.f.col(n - 1), enc.b.col(0);
  enc.s0 = (w.init_w * enc.h0 + w.init_b).array().tanh();
  return enc;
}

// One decoder step: new state, attention activations, weights and context.
struct Step {
  VectorXd x_in;
  VectorXd s;
  MatrixXd u;
  VectorXd alpha;
  VectorXd c;
};

void RunStep(const Seq2SeqParams& w, const Encoded& enc, int prev_token, const VectorXd& s_prev,
             const VectorXd& c_prev, Step& out) {
  const auto e = w.emb.cols();
  out.x_in.resize(e + c_prev.size());
  out.x_in << w.emb.row(prev_token).transpose(), c_prev;
  out.s = (w.dec_x * out.x_in + w.dec_h * s_prev + w.dec_b).array().tanh();
  out.u = Tanh(enc.p.colwise() + w.att_s * out.s);
  const VectorXd scores = out.u.transpose() * w.att_v;
  const double top = scores.maxCoeff();
  out.alpha = (scores.array() - top).exp();
  out.alpha /= out.alpha.sum();
  out.c = enc.m * out.alpha;
}

void WriteBlock(BinaryWriter& writer, const MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) writer.WriteF64(m(r, c));
  }
}

void WriteBlock(BinaryWriter& writer, const VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) writer.WriteF64(v(i));
}

void ReadBlock(BinaryReader& reader, MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = reader.ReadF64();
  }
}

void ReadBlock(BinaryReader& reader, VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = reader.ReadF64();
}

bool IsTrailingPunct(char c) { return c == '.' || c == '?' || c == '!'; }

}  // namespace

std::vector<std::string> GenTokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::string_view word = text.substr(start, i - start);
    while (!word.empty()) {
      const std::size_t comma = word.find(',');
      std::string_view piece = word.substr(0, comma);
      std::vector<std::string> tail;
      while (piece.size() > 1 && IsTrailingPunct(piece.back())) {
        tail.emplace_back(1, piece.back());
        piece.remove_suffix(1);
      }
      if (!piece.empty()) out.emplace_back(piece);
      out.insert(out.end(), tail.rbegin(), tail.rend());
      if (comma == std::string_view::npos) break;
      out.emplace_back(",");
      word.remove_prefix(comma + 1);
    }
  }
  return out;
}

std::string GenDetokenize(std::span<const std::string> tokens) {
  std::string out;
  for (const std::string& t : tokens) {
    if (!out.empty() && t != ",") out += ' ';
    out += t;
  }
  return out;
}

Seq2SeqParams Seq2SeqParams::Zeros(const Seq2SeqDims& d) {
  if (d.vocab < 1 || d.emb < 1 || d.hidden < 1 || d.dec < 1 || d.att < 1) {
    throw Error(ErrorCode::kConfigError, "seq2seq dimensions must be positive");
  }
  const int m = d.memory();
  Seq2SeqParams w;
  w.emb = MatrixXd::Zero(d.vocab, d.emb);
  w.fw_x = MatrixXd::Zero(d.hidden, d.emb);
  w.fw_h = MatrixXd::Zero(d.hidden, d.hidden);
  w.fw_b = VectorXd::Zero(d.hidden);
  w.bw_x = MatrixXd::Zero(d.hidden, d.emb);
  w.bw_h = MatrixXd::Zero(d.hidden, d.hidden);
  w.bw_b = VectorXd::Zero(d.hidden);
  w.init_w = MatrixXd::Zero(d.dec, 2 * d.hidden);
  w.init_b = VectorXd::Zero(d.dec);
  w.dec_x = MatrixXd::Zero(d.dec, d.emb + m);
  w.dec_h = MatrixXd::Zero(d.dec, d.dec);
  w.dec_b = VectorXd::Zero(d.dec);
  w.att_m = MatrixXd::Zero(d.att, m);
  w.att_b = VectorXd::Zero(d.att);
  w.att_s = MatrixXd::Zero(d.att, d.dec);
  w.att_v = VectorXd::Zero(d.att);
  w.out_w = MatrixXd::Zero(d.vocab, d.dec + m);
  w.out_b = VectorXd::Zero(d.vocab);
  return w;
}

Seq2SeqParams Seq2SeqParams::Random(const Seq2SeqDims& dims, std::uint64_t seed) {
  Seq2SeqParams w = Zeros(dims);
  Rng rng(seed);
  auto fill = [&](MatrixXd& m, double r) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.Uniform(-r, r);
    }
  };
  auto fan = [](const MatrixXd& m) { return 1.0 / std::sqrt(static_cast<double>(m.cols())); };
  fill(w.emb, 0.1);
  for (MatrixXd* m : {&w.fw_x, &w.fw_h, &w.bw_x, &w.bw_h, &w.init_w, &w.dec_x, &w.dec_h,
                      &w.att_m, &w.att_s, &w.out_w}) {
    fill(*m, fan(*m));
  }
  for (Eigen::Index i = 0; i < w.att_v.size(); ++i) {
    w.att_v(i) = rng.Uniform(-1.0, 1.0) / std::sqrt(static_cast<double>(w.att_v.size()));
  }
  return w;
}

Seq2SeqDims Seq2SeqParams::dims() const {
  return {static_cast<int>(emb.rows()), static_cast<int>(emb.cols()),
          static_cast<int>(fw_h.rows()), static_cast<int>(dec_h.rows()),
          static_cast<int>(att_v.size())};
}

bool Seq2SeqParams::AllFinite() const {
  bool ok = true;
  ForEach([&](const auto& m) { ok = ok && m.allFinite(); });
  return ok;
}

bool operator==(const Seq2SeqParams& a, const Seq2SeqParams& b) {
  if (a.dims() != b.dims()) return false;
  std::vector<const double*> pa;
  std::vector<const double*> pb;
  std::vector<Eigen::Index> sizes;
  a.ForEach([&](const auto& m) {
    pa.push_back(m.data());
    sizes.push_back(m.size());
  });
  b.ForEach([&](const auto& m) { pb.push_back(m.data()); });
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (!std::equal(pa[i], pa[i] + sizes[i], pb[i])) return false;
  }
  return true;
}

double Seq2SeqLoss(const Seq2SeqParams& w, const Seq2SeqExample& ex, Seq2SeqParams* grad,
                   double scale) {
  if (ex.target.empty()) return 0.0;
  const Encoded enc = RunEncoder(w, ex.source);
  const auto n = enc.m.cols();
  const auto mdim = enc.m.rows();
  const auto hd = w.fw_h.rows();
  const auto e = w.emb.cols();
  const auto t_len = static_cast<Eigen::Index>(ex.target.size());

  std::vector<Step> steps(static_cast<std::size_t>(t_len));
  MatrixXd sc(w.dec_h.rows() + mdim, t_len);  // [s_t; c_t] per column
  VectorXd s_prev = enc.s0;
  VectorXd c_prev = VectorXd::Zero(mdim);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    const int prev_token = t == 0 ? ex.bos : ex.target[static_cast<std::size_t>(t - 1)];
    Step& st = steps[static_cast<std::size_t>(t)];
    RunStep(w, enc, prev_token, s_prev, c_prev, st);
    sc.col(t) << st.s, st.c;
    s_prev = st.s;
    c_prev = st.c;
  }
  MatrixXd logits = (w.out_w * sc).colwise() + w.out_b;

  double loss = 0.0;
  MatrixXd g = MatrixXd::Zero(logits.rows(), t_len);
  for (Eigen::Index t = ex.loss_from; t < t_len; ++t) {
    const double top = logits.col(t).maxCoeff();
    const VectorXd p = (logits.col(t).array() - top).exp();
    const double z = p.sum();
    const int y = ex.target[static_cast<std::size_t>(t)];
    loss += top + std::log(z) - logits(y, t);
    g.col(t) = p / z;
    g(y, t) -= 1.0;
  }
  if (!std::isfinite(loss)) throw Error(ErrorCode::kNonFinite, "seq2seq loss is not finite");
  if (grad == nullptr) return loss;

  Seq2SeqParams& d = *grad;
  g *= scale;
  d.out_w.noalias() += g * sc.transpose();
  d.out_b += g.rowwise().sum();
  const MatrixXd d_sc = w.out_w.transpose() * g;
  const auto dd = w.dec_h.rows();

  MatrixXd d_m = MatrixXd::Zero(mdim, n);
  MatrixXd d_p = MatrixXd::Zero(w.att_v.size(), n);
  VectorXd ds_next = VectorXd::Zero(dd);
  VectorXd dc_carry = VectorXd::Zero(mdim);
  for (Eigen::Index t = t_len - 1; t >= 0; --t) {
    const Step& st = steps[static_cast<std::size_t>(t)];
    const VectorXd& s_before = t == 0 ? enc.s0 : steps[static_cast<std::size_t>(t - 1)].s;
    const VectorXd dc = d_sc.col(t).tail(mdim) + dc_carry;
    // Attention: c = m alpha, alpha = softmax(u^T v), u = tanh(p + att_s s).
    const VectorXd d_alpha = enc.m.transpose() * dc;
    d_m.noalias() += dc * st.alpha.transpose();
    const VectorXd d_score = st.alpha.array() * (d_alpha.array() - st.alpha.dot(d_alpha));
    d.att_v.noalias() += st.u * d_score;
    const MatrixXd d_z =
        ((w.att_v * d_score.transpose()).array() * (1.0 - st.u.array().square())).matrix();
    d_p += d_z;
    const VectorXd dz_sum = d_z.rowwise().sum();
    d.att_s.noalias() += dz_sum * st.s.transpose();
    const VectorXd ds = d_sc.col(t).head(dd) + ds_next + w.att_s.transpose() * dz_sum;
    // Recurrence: s = tanh(dec_x x_in + dec_h s_before + dec_b).
    const VectorXd da = ds.array() * (1.0 - st.s.array().square());
    d.dec_x.noalias() += da * st.x_in.transpose();
    d.dec_h.noalias() += da * s_before.transpose();
    d.dec_b += da;
    const VectorXd dx = w.dec_x.transpose() * da;
    const int prev_token = t == 0 ? ex.bos : ex.target[static_cast<std::size_t>(t - 1)];
    d.emb.row(prev_token) += dx.head(e).transpose();
    dc_carry = dx.tail(mdim);
    ds_next = w.dec_h.transpose() * da;
  }
  const VectorXd da0 = ds_next.array() * (1.0 - enc.s0.array().square());
  d.init_w.noalias() += da0 * enc.h0.transpose();
  d.init_b += da0;
  const VectorXd dh0 = w.init_w.transpose() * da0;

  d.att_m.noalias() += d_p * enc.m.transpose();
  d.att_b += d_p.rowwise().sum();
  d_m.noalias() += w.att_m.transpose() * d_p;

  MatrixXd d_f = d_m.topRows(hd);
  MatrixXd d_b = d_m.middleRows(hd, hd);
  MatrixXd d_x = d_m.bottomRows(e);
  d_f.col(n - 1) += dh0.head(hd);
  d_b.col(0) += dh0.tail(hd);

  MatrixXd da_f(hd, n);
  VectorXd carry = VectorXd::Zero(hd);
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    const VectorXd df = d_f.col(j) + carry;
    da_f.col(j) = df.array() * (1.0 - enc.f.col(j).array().square());
    carry = w.fw_h.transpose() * da_f.col(j);
  }
  MatrixXd da_b(hd, n);
  carry.setZero();
  for (Eigen::Index j = 0; j < n; ++j) {
    const VectorXd db = d_b.col(j) + carry;
    da_b.col(j) = db.array() * (1.0 - enc.b.col(j).array().square());
    carry = w.bw_h.transpose() * da_b.col(j);
  }
  d.fw_x.noalias() += da_f * enc.x.transpose();
  d.fw_b += da_f.rowwise().sum();
  d.bw_x.noalias() += da_b * enc.x.transpose();
  d.bw_b += da_b.rowwise().sum();
  if (n > 1) {
    d.fw_h.noalias() += da_f.rightCols(n - 1) * enc.f.leftCols(n - 1).transpose();
    d.bw_h.noalias() += da_b.leftCols(n - 1) * enc.b.rightCols(n - 1).transpose();
  }
  d_x.noalias() += w.fw_x.transpose() * da_f;
  d_x.noalias() += w.bw_x.transpose() * da_b;
  for (Eigen::Index j = 0; j < n; ++j) {
    d.emb.row(enc.source[static_cast<std::size_t>(j)]) += d_x.col(j).transpose();
  }
  return loss;
}

std::vector<int> GreedyDecode(const Seq2SeqParams& w, std::span<const int> source,
                              std::span<const int> forced, int bos, int eos, int max_tokens) {
  const Encoded enc = RunEncoder(w, source);
  std::vector<int> out;
  VectorXd s_prev = enc.s0;
  VectorXd c_prev = VectorXd::Zero(enc.m.rows());
  VectorXd sc(w.dec_h.rows() + enc.m.rows());
  Step st;
  int prev = bos;
  std::size_t forced_pos = 0;
  while (static_cast<int>(out.size()) < max_tokens) {
    RunStep(w, enc, prev, s_prev, c_prev, st);
    s_prev = st.s;
    c_prev = st.c;
    if (forced_pos < forced.size()) {
      prev = forced[forced_pos++];
      continue;
    }
    sc << st.s, st.c;
    const VectorXd logits = w.out_w * sc + w.out_b;
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < logits.size(); ++i) {
      if (logits(i) > logits(best)) best = i;
    }
    if (static_cast<int>(best) == eos) break;
    out.push_back(static_cast<int>(best));
    prev = static_cast<int>(best);
  }
  return out;
}

std::vector<int> Seq2SeqModel::Ids(std::span<const std::string> tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const std::string& t : tokens) ids.push_back(vocab.Id(t));
  return ids;
}

std::string Seq2SeqModel::Serialize() const {
  BinaryWriter w;
  w.WriteMagic(kMagic, kVersion);
  w.WriteU32(static_cast<std::uint32_t>(vocab.size()));
  for (const std::string& t : vocab.tokens()) w.WriteString(t);
  const Seq2SeqDims d = params.dims();
  for (int v : {d.emb, d.hidden, d.dec, d.att}) w.WriteU32(static_cast<std::uint32_t>(v));
  params.ForEach([&](const auto& m) { WriteBlock(w, m); });
  return w.bytes();
}

Seq2SeqModel Seq2SeqModel::Deserialize(std::string bytes) {
  BinaryReader r(std::move(bytes));
  r.ExpectMagic(kMagic, kVersion);
  const std::uint32_t n = r.ReadU32();
  std::vector<std::string> tokens;
  for (std::uint32_t i = 0; i < n; ++i) tokens.push_back(r.ReadString());
  Seq2SeqModel model;
  model.vocab = Vocab::FromTokens(tokens);
  if (model.vocab.tokens() != tokens) {
    throw Error(ErrorCode::kIoError, "generator vocabulary is not canonical");
  }
  Seq2SeqDims d;
  d.vocab = static_cast<int>(n);
  for (int* v : {&d.emb, &d.hidden, &d.dec, &d.att}) {
    const std::uint32_t x = r.ReadU32();
    if (x == 0 || x > 4096) throw Error(ErrorCode::kIoError, "bad generator dimension");
    *v = static_cast<int>(x);
  }
  model.params = Seq2SeqParams::Zeros(d);
  model.params.ForEach([&](auto& m) { ReadBlock(r, m); });
  r.ExpectEnd();
  if (!model.params.AllFinite()) {
    throw Error(ErrorCode::kNonFinite, "generator file holds non-finite values");
  }
  return model;
}

void Seq2SeqModel::Save(const std::string& path) const { WriteStringToFile(path, Serialize()); }

Seq2SeqModel Seq2SeqModel::Load(const std::string& path) {
  return Deserialize(ReadFileToString(path));
}

Seq2SeqTrainResult TrainSeq2Seq(Seq2SeqModel init, std::span<const Seq2SeqExample> data,
                                const Seq2SeqTrainConfig& cfg) {
  if (data.empty()) throw Error(ErrorCode::kInvalidArgument, "no generator training examples");
  if (cfg.batch_size < 1 || cfg.epochs < 0) {
    throw Error(ErrorCode::kConfigError, "batch_size must be >= 1 and epochs >= 0");
  }
  Seq2SeqTrainResult result{std::move(init), {}};
  Seq2SeqParams& w = result.model.params;
  Seq2SeqParams grad = Seq2SeqParams::Zeros(w.dims());
  std::vector<ParamBlock> blocks;
  {
    std::vector<double*> values;
    w.ForEach([&](auto& m) { values.push_back(m.data()); });
    std::size_t i = 0;
    grad.ForEach([&](auto& m) {
      blocks.push_back({values[i++], m.data(), static_cast<std::size_t>(m.size())});
    });
  }
  Optimizer optimizer({.kind = cfg.optimizer,
                       .learning_rate = cfg.learning_rate,
                       .clip_norm = cfg.clip_norm},
                      blocks);
  Rng rng(DeriveSeed(cfg.seed, 0x733273));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.Shuffle(order);
    if (cfg.linear_decay) {
      optimizer.set_learning_rate(cfg.learning_rate * static_cast<double>(cfg.epochs - epoch) /
                                  static_cast<double>(cfg.epochs));
    }
    double epoch_loss = 0.0;
    double epoch_tokens = 0.0;
    int step = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size), ++step) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      double tokens = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const Seq2SeqExample& ex = data[order[i]];
        tokens += static_cast<double>(ex.target.size()) - ex.loss_from;
      }
      if (tokens <= 0.0) continue;
      grad.ForEach([](auto& m) { m.setZero(); });
      double loss = 0.0;
      try {
        for (std::size_t i = start; i < end; ++i) {
          loss += Seq2SeqLoss(w, data[order[i]], &grad, 1.0 / tokens);
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNonFinite) throw;
        throw Error(ErrorCode::kNonFinite, "epoch " + std::to_string(epoch) + " step " +
                                               std::to_string(step) + ": non-finite loss");
      }
      optimizer.Step(blocks);
      epoch_loss += loss;
      epoch_tokens += tokens;
    }
    result.loss_curve.push_back(epoch_tokens > 0.0 ? epoch_loss / epoch_tokens : 0.0);
  }
  if (!w.AllFinite()) throw Error(ErrorCode::kNonFinite, "generator parameters diverged");
  return result;
}

}  // namespace levdex
