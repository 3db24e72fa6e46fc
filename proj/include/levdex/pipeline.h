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

#ifndef LEVDEX_PIPELINE_H_
#define LEVDEX_PIPELINE_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "levdex/bm25.h"
#include "levdex/corpus.h"
#include "levdex/dual_encoder.h"
#include "levdex/evaluation.h"
#include "levdex/generator.h"
#include "levdex/neural_index.h"
#include "levdex/pair_mining.h"
#include "levdex/retriever.h"
#include "levdex/seq2seq.h"

namespace levdex {

struct SynthConfig {
  int n_train = 400;
  int n_test = 200;
  int n_domains = 6;
  int vocab_size = 10;
};

// Everything that determines a run. Field names follow the JSON config.
struct RunConfig {
  std::uint64_t seed = 1;       // model seeds derive from this
  std::uint64_t data_seed = 1;  // synthetic corpora derive from this
  std::string train_corpus;     // empty: synthesize
  std::string test_corpus;
  CorpusFormat corpus_format = CorpusFormat::kJsonl;
  SynthConfig synth;

  RetrievalMethod retrieval = RetrievalMethod::kNeuralFinetuned;
  int k = 1;
  bool index_prev_state = true;
  bool index_delex = true;
  bool bm25_delex = false;
  Bm25Params bm25;
  MiningOptions mining;
  EncoderTrainConfig encoder{.learning_rate = 0.01, .optimizer = OptimizerKind::kAdam};

  GeneratorSpec generator;
  Seq2SeqTrainConfig seq2seq;
  std::vector<EvalMode> eval_modes = {EvalMode::kPropagated, EvalMode::kGroundTruthPrev};
  SdeVariant sde_variant = SdeVariant::kTurn;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};  // used by ablate

  // Neural index text format.
  ContextOptions IndexFormat() const { return {index_delex, index_prev_state}; }
  // BM25 retrieval text format; mining always uses raw text with prev state.
  ContextOptions Bm25Format() const { return {bm25_delex, index_prev_state}; }
};

// Throws CONFIG_ERROR on unknown keys, wrong types or invalid combinations.
RunConfig RunConfigFromJson(const nlohmann::json& j);
nlohmann::ordered_json RunConfigToJson(const RunConfig& cfg);
void ValidateRunConfig(const RunConfig& cfg);
// Applies LEVDEX_SEED when set: it replaces seed and seeds.
void ApplySeedOverride(RunConfig& cfg);

struct Datasets {
  Corpus train;
  Corpus test;
  std::vector<ContextExample> train_examples;
};

// Loads the configured corpora or synthesizes them from data_seed.
Datasets LoadDatasets(const RunConfig& cfg);

// Stage seeds, one per consumer of randomness.
std::uint64_t EncoderSeed(const RunConfig& cfg);
std::uint64_t GeneratorSeed(const RunConfig& cfg);

Bm25Index BuildMiningIndex(std::span<const ContextExample> train, const RunConfig& cfg);
MiningResult MinePairs(std::span<const ContextExample> train, const Bm25Index& index,
                       const RunConfig& cfg);
DualEncoder UntrainedEncoder(std::span<const ContextExample> train, const RunConfig& cfg);
EncoderTrainResult FineTuneEncoder(std::span<const ContextExample> train,
                                   std::span<const TrainingPair> pairs, const RunConfig& cfg);

// Fitted components of one configuration. Only the parts the retrieval
// method and generator need are filled in.
struct Pipeline {
  RunConfig config;
  std::optional<Bm25Index> bm25;
  std::optional<MiningStats> mining;
  std::optional<DualEncoder> encoder;
  std::vector<double> encoder_loss;
  std::optional<NeuralIndex> index;
  std::optional<Seq2SeqModel> generator;
  std::vector<double> generator_loss;

  // Null retriever for method none.
  std::unique_ptr<Retriever> MakeRetriever() const;
};

// Builds the retrieval side of a pipeline.
Pipeline FitRetrieval(const RunConfig& cfg, const Datasets& data);

// Retrieves k spans for every training context, same-dialogue hits dropped.
std::vector<GeneratorSample> GeneratorSamples(const Pipeline& pipeline,
                                              std::span<const ContextExample> train);

// Trains the generator of a pipeline whose retrieval side is fitted, using
// p.config. No-op unless the generator is trainable.
void FitGenerator(Pipeline& p, const Datasets& data);

// Retrieval side, then the generator when it is trainable.
Pipeline FitPipeline(const RunConfig& cfg, const Datasets& data);

// Writes config.json plus one file per fitted part into `dir` and returns
// the written file names in a fixed order.
std::vector<std::string> SavePipeline(const Pipeline& pipeline, const std::string& dir);
// Throws CONFIG_ERROR when a part the config needs is missing.
Pipeline LoadPipeline(const std::string& dir);

EvalReport EvaluatePipeline(const Pipeline& pipeline, const Corpus& test, EvalMode mode);

// Named grids of configurations derived from a base config.
struct GridCell {
  std::string label;
  RunConfig config;
};
std::vector<GridCell> AblationGrid(std::string_view grid, const RunConfig& base);

}  // namespace levdex

#endif  // LEVDEX_PIPELINE_H_
