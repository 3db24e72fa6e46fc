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

#include "levdex/generator.h"

#include "levdex/error.h"
#include "levdex/random.h"

namespace levdex {

GeneratorKind ParseGeneratorKind(std::string_view name) {
  if (name == "toy-seq2seq" || name == "toy") return GeneratorKind::kToySeq2Seq;
  if (name == "copy-retrieval") return GeneratorKind::kCopyRetrieval;
  if (name == "oracle") return GeneratorKind::kOracle;
  throw Error(ErrorCode::kConfigError, "unknown generator '" + std::string(name) + "'");
}

const char* GeneratorKindName(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kToySeq2Seq: return "toy-seq2seq";
    case GeneratorKind::kCopyRetrieval: return "copy-retrieval";
    case GeneratorKind::kOracle: return "oracle";
  }
  return "unknown";
}

Conditioning ParseConditioning(std::string_view name) {
  if (name == "encoder") return Conditioning::kEncoder;
  if (name == "decoder") return Conditioning::kDecoder;
  throw Error(ErrorCode::kConfigError, "unknown conditioning '" + std::string(name) + "'");
}

const char* ConditioningName(Conditioning conditioning) {
  return conditioning == Conditioning::kEncoder ? "encoder" : "decoder";
}

void ValidateSpec(const GeneratorSpec& spec) {
  if (spec.conditioning == Conditioning::kDecoder && spec.kind != GeneratorKind::kToySeq2Seq) {
    throw Error(ErrorCode::kConfigError, "decoder conditioning needs the toy-seq2seq generator");
  }
  if (spec.max_output_tokens < 1) {
    throw Error(ErrorCode::kConfigError, "max_output_tokens must be positive");
  }
}

GeneratorInput MakeGeneratorInput(const GeneratorSpec& spec, const DialogueContext& ctx,
                                  std::span<const LevSpan> retrieved) {
  GeneratorInput input;
  if (spec.conditioning == Conditioning::kEncoder) {
    input.source = GenTokenize(AssembleContext(ctx, retrieved).text);
    return input;
  }
  if (retrieved.size() > 1) {
    throw Error(ErrorCode::kTooManyResults, "decoder conditioning takes a single span");
  }
  input.source = GenTokenize(AssembleContext(ctx, {}).text);
  if (!retrieved.empty()) input.prefix = GenTokenize(SerializeState(retrieved.front()));
  input.prefix.emplace_back(kEosL1);
  return input;
}

std::string Generate(const GeneratorSpec& spec, const Seq2SeqModel* model,
                     const DialogueContext& ctx, std::span<const LevSpan> retrieved,
                     const LevSpan* gold) {
  switch (spec.kind) {
    case GeneratorKind::kOracle:
      if (gold == nullptr) throw Error(ErrorCode::kMissingGold, "oracle generator without gold");
      return SerializeState(*gold);
    case GeneratorKind::kCopyRetrieval:
      return retrieved.empty() ? std::string() : SerializeState(retrieved.front());
    case GeneratorKind::kToySeq2Seq:
      break;
  }
  if (model == nullptr) throw Error(ErrorCode::kMissingParams, "toy-seq2seq without parameters");
  const GeneratorInput input = MakeGeneratorInput(spec, ctx, retrieved);
  const std::vector<int> out =
      GreedyDecode(model->params, model->Ids(input.source), model->Ids(input.prefix),
                   model->bos(), model->eos(), spec.max_output_tokens);
  std::vector<std::string> tokens;
  tokens.reserve(out.size());
  for (int id : out) tokens.push_back(model->vocab.tokens()[static_cast<std::size_t>(id)]);
  return GenDetokenize(tokens);
}

DialogueState PredictState(const DialogueState& prev, std::string_view generated) {
  return LevApply(prev, ParseLevSpan(generated));
}

Vocab GeneratorVocab(const GeneratorSpec& spec, std::span<const GeneratorSample> samples) {
  std::vector<std::string> tokens = {std::string(kBos), std::string(kEos), std::string(kEosL1),
                                     std::string(kEosL2), std::string(kEosL3), std::string(kEosB),
                                     std::string(kEosU1), std::string(kEosR), std::string(kEosU)};
  for (const GeneratorSample& s : samples) {
    GeneratorInput input = MakeGeneratorInput(spec, s.context, s.retrieved);
    for (std::string& t : input.source) tokens.push_back(std::move(t));
    for (std::string& t : input.prefix) tokens.push_back(std::move(t));
    for (std::string& t : GenTokenize(SerializeState(s.gold))) tokens.push_back(std::move(t));
  }
  return Vocab::FromTokens(std::move(tokens));
}

Seq2SeqExample MakeSeq2SeqExample(const Seq2SeqModel& model, const GeneratorSpec& spec,
                                  const GeneratorSample& sample) {
  const GeneratorInput input = MakeGeneratorInput(spec, sample.context, sample.retrieved);
  Seq2SeqExample ex;
  ex.source = model.Ids(input.source);
  ex.bos = model.bos();
  ex.target = model.Ids(input.prefix);
  ex.loss_from = static_cast<int>(ex.target.size());
  for (int id : model.Ids(GenTokenize(SerializeState(sample.gold)))) ex.target.push_back(id);
  ex.target.push_back(model.eos());
  return ex;
}

Seq2SeqTrainResult TrainGenerator(const GeneratorSpec& spec,
                                  std::span<const GeneratorSample> samples,
                                  const Seq2SeqTrainConfig& cfg) {
  ValidateSpec(spec);
  if (spec.kind != GeneratorKind::kToySeq2Seq) {
    throw Error(ErrorCode::kConfigError, "only the toy-seq2seq generator is trainable");
  }
  Seq2SeqModel init;
  init.vocab = GeneratorVocab(spec, samples);
  Seq2SeqDims dims = cfg.dims;
  dims.vocab = init.vocab.size();
  init.params = Seq2SeqParams::Random(dims, DeriveSeed(cfg.seed, 0x696e6974));
  std::vector<Seq2SeqExample> data;
  data.reserve(samples.size());
  for (const GeneratorSample& s : samples) data.push_back(MakeSeq2SeqExample(init, spec, s));
  return TrainSeq2Seq(std::move(init), data, cfg);
}

}  // namespace levdex
