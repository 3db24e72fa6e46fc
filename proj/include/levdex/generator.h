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

#ifndef LEVDEX_GENERATOR_H_
#define LEVDEX_GENERATOR_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "levdex/corpus.h"
#include "levdex/seq2seq.h"

namespace levdex {

enum class GeneratorKind { kToySeq2Seq, kCopyRetrieval, kOracle };
enum class Conditioning { kEncoder, kDecoder };

GeneratorKind ParseGeneratorKind(std::string_view name);
const char* GeneratorKindName(GeneratorKind kind);
Conditioning ParseConditioning(std::string_view name);
const char* ConditioningName(Conditioning conditioning);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::kToySeq2Seq;
  Conditioning conditioning = Conditioning::kEncoder;
  int max_output_tokens = 64;
};

// Throws CONFIG_ERROR for decoder conditioning on anything but the seq2seq
// model and for a non-positive output budget.
void ValidateSpec(const GeneratorSpec& spec);

// What the seq2seq model reads for one turn. With encoder conditioning the
// retrieved spans sit in the source and the prefix is empty. With decoder
// conditioning the source has no spans and the prefix is the first span
// followed by <eos_l1>; it is forced and then stripped.
struct GeneratorInput {
  std::vector<std::string> source;
  std::vector<std::string> prefix;
};

// Throws TOO_MANY_RESULTS for more than one span under decoder conditioning.
GeneratorInput MakeGeneratorInput(const GeneratorSpec& spec, const DialogueContext& ctx,
                                  std::span<const LevSpan> retrieved);

// Generated lev text. The oracle returns the serialized gold span and throws
// MISSING_GOLD without one; copy-retrieval returns the first retrieved span
// or ""; the seq2seq model throws MISSING_PARAMS when `model` is null.
std::string Generate(const GeneratorSpec& spec, const Seq2SeqModel* model,
                     const DialogueContext& ctx, std::span<const LevSpan> retrieved,
                     const LevSpan* gold = nullptr);

// LevApply(prev, ParseLevSpan(generated)).
DialogueState PredictState(const DialogueState& prev, std::string_view generated);

// One supervised instance: a turn, what was retrieved for it and its gold span.
struct GeneratorSample {
  DialogueContext context;
  std::vector<LevSpan> retrieved;
  LevSpan gold;
};

// Vocabulary over sources, prefixes and targets plus <s>, </s> and the
// separators.
Vocab GeneratorVocab(const GeneratorSpec& spec, std::span<const GeneratorSample> samples);

Seq2SeqExample MakeSeq2SeqExample(const Seq2SeqModel& model, const GeneratorSpec& spec,
                                  const GeneratorSample& sample);

// Builds the vocabulary, initializes from cfg.seed and trains.
Seq2SeqTrainResult TrainGenerator(const GeneratorSpec& spec,
                                  std::span<const GeneratorSample> samples,
                                  const Seq2SeqTrainConfig& cfg);

}  // namespace levdex

#endif  // LEVDEX_GENERATOR_H_
