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

#include "levdex/pipeline.h"

#include <cstdlib>
#include <filesystem>
#include <set>
#include <utility>

#include "levdex/binary_io.h"
#include "levdex/error.h"
#include "levdex/random.h"

namespace levdex {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Reads known keys from one JSON object and rejects the rest.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) Fail(path_, "expected an object");
  }

  template <typename T>
  void Read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = node_.find(key);
    if (it == node_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      Fail(path_ + "." + key, "wrong type");
    }
  }

  template <typename Parse>
  void ReadEnum(const char* key, Parse parse) {
    seen_.insert(key);
    const auto it = node_.find(key);
    if (it == node_.end()) return;
    if (!it->is_string()) Fail(path_ + "." + key, "expected a string");
    parse(it->template get<std::string>());
  }

  const json* Child(const char* key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  void Finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) Fail(path_ + "." + key, "unknown key");
    }
  }

  [[noreturn]] static void Fail(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::kConfigError, path + ": " + what);
  }

  const std::string& path() const { return path_; }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<GeneratorSample> SamplesFor(const Retriever* retriever, int k,
                                        std::span<const ContextExample> examples) {
  std::vector<GeneratorSample> out;
  out.reserve(examples.size());
  for (const ContextExample& ex : examples) {
    GeneratorSample s{ex.context, {}, ex.gold_lev};
    if (retriever != nullptr) {
      for (Retrieved& r : retriever->Retrieve(ex.context, k, ex.context.dialogue_id)) {
        s.retrieved.push_back(std::move(r.payload.lev));
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

RunConfig RunConfigFromJson(const json& j) {
  RunConfig cfg;
  ObjectReader top(j, "config");
  top.Read("seed", cfg.seed);
  top.Read("data_seed", cfg.data_seed);
  top.Read("train_corpus", cfg.train_corpus);
  top.Read("test_corpus", cfg.test_corpus);
  top.ReadEnum("corpus_format", [&](const std::string& v) {
    cfg.corpus_format = ParseCorpusFormat(v);
  });
  if (const json* node = top.Child("synth")) {
    ObjectReader r(*node, "config.synth");
    r.Read("n_train", cfg.synth.n_train);
    r.Read("n_test", cfg.synth.n_test);
    r.Read("n_domains", cfg.synth.n_domains);
    r.Read("vocab_size", cfg.synth.vocab_size);
    r.Finish();
  }
  top.ReadEnum("retrieval", [&](const std::string& v) { cfg.retrieval = ParseRetrievalMethod(v); });
  top.Read("k", cfg.k);
  top.Read("index_prev_state", cfg.index_prev_state);
  top.Read("index_delex", cfg.index_delex);
  top.Read("bm25_delex", cfg.bm25_delex);
  if (const json* node = top.Child("bm25")) {
    ObjectReader r(*node, "config.bm25");
    r.Read("k1", cfg.bm25.k1);
    r.Read("b", cfg.bm25.b);
    r.Finish();
  }
  if (const json* node = top.Child("mining")) {
    ObjectReader r(*node, "config.mining");
    r.Read("top", cfg.mining.top);
    r.Read("exclude_same_dialogue", cfg.mining.exclude_same_dialogue);
    r.Read("match_values", cfg.mining.match_values);
    r.Finish();
  }
  if (const json* node = top.Child("encoder")) {
    ObjectReader r(*node, "config.encoder");
    r.Read("dim", cfg.encoder.dim);
    r.Read("learning_rate", cfg.encoder.learning_rate);
    r.Read("batch_size", cfg.encoder.batch_size);
    r.Read("epochs", cfg.encoder.epochs);
    r.ReadEnum("optimizer", [&](const std::string& v) {
      cfg.encoder.optimizer = ParseOptimizerKind(v);
    });
    r.Read("in_batch_negatives", cfg.encoder.in_batch_negatives);
    r.Finish();
  }
  if (const json* node = top.Child("generator")) {
    ObjectReader r(*node, "config.generator");
    r.ReadEnum("kind", [&](const std::string& v) { cfg.generator.kind = ParseGeneratorKind(v); });
    r.ReadEnum("conditioning", [&](const std::string& v) {
      cfg.generator.conditioning = ParseConditioning(v);
    });
    r.Read("max_output_tokens", cfg.generator.max_output_tokens);
    r.Finish();
  }
  if (const json* node = top.Child("seq2seq")) {
    ObjectReader r(*node, "config.seq2seq");
    r.Read("emb", cfg.seq2seq.dims.emb);
    r.Read("hidden", cfg.seq2seq.dims.hidden);
    r.Read("dec", cfg.seq2seq.dims.dec);
    r.Read("att", cfg.seq2seq.dims.att);
    r.Read("learning_rate", cfg.seq2seq.learning_rate);
    r.Read("batch_size", cfg.seq2seq.batch_size);
    r.Read("epochs", cfg.seq2seq.epochs);
    r.ReadEnum("optimizer", [&](const std::string& v) {
      cfg.seq2seq.optimizer = ParseOptimizerKind(v);
    });
    r.Read("clip_norm", cfg.seq2seq.clip_norm);
    r.Read("linear_decay", cfg.seq2seq.linear_decay);
    r.Finish();
  }
  if (const json* node = top.Child("eval_modes")) {
    if (!node->is_array()) ObjectReader::Fail("config.eval_modes", "expected an array");
    cfg.eval_modes.clear();
    for (const json& m : *node) {
      if (!m.is_string()) ObjectReader::Fail("config.eval_modes", "expected strings");
      cfg.eval_modes.push_back(ParseEvalMode(m.get<std::string>()));
    }
  }
  top.ReadEnum("sde_variant", [&](const std::string& v) { cfg.sde_variant = ParseSdeVariant(v); });
  top.Read("seeds", cfg.seeds);
  top.Finish();
  ValidateRunConfig(cfg);
  return cfg;
}

ordered_json RunConfigToJson(const RunConfig& cfg) {
  ordered_json modes = ordered_json::array();
  for (EvalMode m : cfg.eval_modes) modes.push_back(EvalModeName(m));
  return {
      {"seed", cfg.seed},
      {"data_seed", cfg.data_seed},
      {"train_corpus", cfg.train_corpus},
      {"test_corpus", cfg.test_corpus},
      {"corpus_format", cfg.corpus_format == CorpusFormat::kJsonl ? "jsonl" : "multiwoz-json"},
      {"synth",
       {{"n_train", cfg.synth.n_train},
        {"n_test", cfg.synth.n_test},
        {"n_domains", cfg.synth.n_domains},
        {"vocab_size", cfg.synth.vocab_size}}},
      {"retrieval", RetrievalMethodName(cfg.retrieval)},
      {"k", cfg.k},
      {"index_prev_state", cfg.index_prev_state},
      {"index_delex", cfg.index_delex},
      {"bm25_delex", cfg.bm25_delex},
      {"bm25", {{"k1", cfg.bm25.k1}, {"b", cfg.bm25.b}}},
      {"mining",
       {{"top", cfg.mining.top}, {"exclude_same_dialogue", cfg.mining.exclude_same_dialogue},
        {"match_values", cfg.mining.match_values}}},
      {"encoder",
       {{"dim", cfg.encoder.dim},
        {"learning_rate", cfg.encoder.learning_rate},
        {"batch_size", cfg.encoder.batch_size},
        {"epochs", cfg.encoder.epochs},
        {"optimizer", OptimizerName(cfg.encoder.optimizer)},
        {"in_batch_negatives", cfg.encoder.in_batch_negatives}}},
      {"generator",
       {{"kind", GeneratorKindName(cfg.generator.kind)},
        {"conditioning", ConditioningName(cfg.generator.conditioning)},
        {"max_output_tokens", cfg.generator.max_output_tokens}}},
      {"seq2seq",
       {{"emb", cfg.seq2seq.dims.emb},
        {"hidden", cfg.seq2seq.dims.hidden},
        {"dec", cfg.seq2seq.dims.dec},
        {"att", cfg.seq2seq.dims.att},
        {"learning_rate", cfg.seq2seq.learning_rate},
        {"batch_size", cfg.seq2seq.batch_size},
        {"epochs", cfg.seq2seq.epochs},
        {"optimizer", OptimizerName(cfg.seq2seq.optimizer)},
        {"clip_norm", cfg.seq2seq.clip_norm},
        {"linear_decay", cfg.seq2seq.linear_decay}}},
      {"eval_modes", modes},
      {"sde_variant", SdeVariantName(cfg.sde_variant)},
      {"seeds", cfg.seeds},
  };
}

void ValidateRunConfig(const RunConfig& cfg) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfigError, what); };
  if (cfg.k < 1 || cfg.k > kMaxRetrieved) fail("k must be 1, 2 or 3");
  ValidateSpec(cfg.generator);
  if (cfg.generator.conditioning == Conditioning::kDecoder && cfg.k != 1) {
    fail("decoder conditioning takes k = 1");
  }
  if (cfg.generator.kind == GeneratorKind::kCopyRetrieval &&
      cfg.retrieval == RetrievalMethod::kNone) {
    fail("copy-retrieval needs a retrieval method");
  }
  if (cfg.train_corpus.empty() != cfg.test_corpus.empty()) {
    fail("train_corpus and test_corpus go together");
  }
  if (cfg.synth.n_train < 1 || cfg.synth.n_test < 1) fail("synth sizes must be positive");
  if (cfg.mining.top < 2) fail("mining.top must be at least 2");
  if (cfg.encoder.dim < 1 || cfg.encoder.batch_size < 1 || cfg.encoder.epochs < 0 ||
      !(cfg.encoder.learning_rate >= 0.0)) {
    fail("bad encoder settings");
  }
  if (cfg.seq2seq.batch_size < 1 || cfg.seq2seq.epochs < 0 ||
      !(cfg.seq2seq.learning_rate >= 0.0)) {
    fail("bad seq2seq settings");
  }
  if (cfg.eval_modes.empty()) fail("eval_modes is empty");
  if (cfg.seeds.empty()) fail("seeds is empty");
}

void ApplySeedOverride(RunConfig& cfg) {
  const char* env = std::getenv("LEVDEX_SEED");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0') {
    throw Error(ErrorCode::kConfigError, std::string("LEVDEX_SEED is not an integer: ") + env);
  }
  cfg.seed = v;
  cfg.seeds = {v};
}

Datasets LoadDatasets(const RunConfig& cfg) {
  Datasets d;
  if (!cfg.train_corpus.empty()) {
    d.train = LoadCorpus(cfg.train_corpus, cfg.corpus_format, Split::kTrain);
    d.test = LoadCorpus(cfg.test_corpus, cfg.corpus_format, Split::kTest);
  } else {
    d.train = SynthCorpus({.seed = DeriveSeed(cfg.data_seed, 1),
                           .n_dialogues = cfg.synth.n_train,
                           .n_domains = cfg.synth.n_domains,
                           .vocab_size = cfg.synth.vocab_size,
                           .split = Split::kTrain});
    d.test = SynthCorpus({.seed = DeriveSeed(cfg.data_seed, 2),
                          .n_dialogues = cfg.synth.n_test,
                          .n_domains = cfg.synth.n_domains,
                          .vocab_size = cfg.synth.vocab_size,
                          .split = Split::kTest});
  }
  d.train_examples = EnumerateContexts(d.train);
  return d;
}

std::uint64_t EncoderSeed(const RunConfig& cfg) { return DeriveSeed(cfg.seed, 0x656e63); }
std::uint64_t GeneratorSeed(const RunConfig& cfg) { return DeriveSeed(cfg.seed, 0x67656e); }

Bm25Index BuildMiningIndex(std::span<const ContextExample> train, const RunConfig& cfg) {
  return Bm25Index::Build(Bm25Documents(train, cfg.mining.query_format), cfg.bm25);
}

MiningResult MinePairs(std::span<const ContextExample> train, const Bm25Index& index,
                       const RunConfig& cfg) {
  return MineDataset(train, index, cfg.mining);
}

DualEncoder UntrainedEncoder(std::span<const ContextExample> train, const RunConfig& cfg) {
  return InitDualEncoder(ContextVocab(train, cfg.IndexFormat()), cfg.encoder.dim,
                         EncoderSeed(cfg));
}

EncoderTrainResult FineTuneEncoder(std::span<const ContextExample> train,
                                   std::span<const TrainingPair> pairs, const RunConfig& cfg) {
  DualEncoder init = UntrainedEncoder(train, cfg);
  const std::vector<EncodedPair> data = EncodePairs(init.vocab, pairs, cfg.IndexFormat());
  EncoderTrainConfig tc = cfg.encoder;
  tc.seed = EncoderSeed(cfg);
  return TrainDualEncoder(std::move(init), data, tc);
}

std::unique_ptr<Retriever> Pipeline::MakeRetriever() const {
  switch (config.retrieval) {
    case RetrievalMethod::kNone:
      return nullptr;
    case RetrievalMethod::kBm25:
      if (!bm25) throw Error(ErrorCode::kConfigError, "bm25 index missing");
      return std::make_unique<Bm25Retriever>(*bm25, config.Bm25Format());
    case RetrievalMethod::kNeuralUntrained:
    case RetrievalMethod::kNeuralFinetuned:
      if (!index || !encoder) throw Error(ErrorCode::kConfigError, "neural index missing");
      return std::make_unique<NeuralRetriever>(*index, *encoder);
    case RetrievalMethod::kRandom: {
      if (!index) throw Error(ErrorCode::kConfigError, "random retrieval needs an index");
      std::vector<DocPayload> pool;
      for (std::size_t i = 0; i < index->size(); ++i) pool.push_back(index->payload(i));
      return std::make_unique<RandomRetriever>(std::move(pool), DeriveSeed(config.seed, 0x726e64));
    }
  }
  return nullptr;
}

Pipeline FitRetrieval(const RunConfig& cfg, const Datasets& data) {
  ValidateRunConfig(cfg);
  Pipeline p;
  p.config = cfg;
  const auto& train = data.train_examples;
  switch (cfg.retrieval) {
    case RetrievalMethod::kNone:
      break;
    case RetrievalMethod::kBm25:
      p.bm25 = Bm25Index::Build(Bm25Documents(train, cfg.Bm25Format()), cfg.bm25);
      break;
    case RetrievalMethod::kNeuralUntrained:
    case RetrievalMethod::kRandom:
      p.encoder = UntrainedEncoder(train, cfg);
      p.index = NeuralIndex::Build(*p.encoder, train, cfg.IndexFormat());
      break;
    case RetrievalMethod::kNeuralFinetuned: {
      const Bm25Index mining_index = BuildMiningIndex(train, cfg);
      const MiningResult mined = MinePairs(train, mining_index, cfg);
      p.mining = mined.stats;
      EncoderTrainResult trained = FineTuneEncoder(train, mined.pairs, cfg);
      p.encoder = std::move(trained.encoder);
      p.encoder_loss = std::move(trained.loss_curve);
      p.index = NeuralIndex::Build(*p.encoder, train, cfg.IndexFormat());
      break;
    }
  }
  return p;
}

std::vector<GeneratorSample> GeneratorSamples(const Pipeline& pipeline,
                                              std::span<const ContextExample> train) {
  const std::unique_ptr<Retriever> retriever = pipeline.MakeRetriever();
  return SamplesFor(retriever.get(), pipeline.config.k, train);
}

void FitGenerator(Pipeline& p, const Datasets& data) {
  const RunConfig& cfg = p.config;
  if (cfg.generator.kind != GeneratorKind::kToySeq2Seq) return;
  const std::vector<GeneratorSample> samples = GeneratorSamples(p, data.train_examples);
  Seq2SeqTrainConfig tc = cfg.seq2seq;
  tc.seed = GeneratorSeed(cfg);
  Seq2SeqTrainResult trained = TrainGenerator(cfg.generator, samples, tc);
  p.generator = std::move(trained.model);
  p.generator_loss = std::move(trained.loss_curve);
}

Pipeline FitPipeline(const RunConfig& cfg, const Datasets& data) {
  Pipeline p = FitRetrieval(cfg, data);
  FitGenerator(p, data);
  return p;
}

std::vector<std::string> SavePipeline(const Pipeline& p, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> names = {"config.json"};
  const auto path = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };
  WriteStringToFile(path("config.json"), RunConfigToJson(p.config).dump(2) + "\n");
  if (p.bm25) {
    p.bm25->Save(path("bm25.bin"));
    names.push_back("bm25.bin");
  }
  if (p.encoder) {
    p.encoder->Save(path("encoder.bin"));
    names.push_back("encoder.bin");
  }
  if (p.index) {
    p.index->Save(path("index.bin"));
    names.push_back("index.bin");
  }
  if (p.generator) {
    p.generator->Save(path("generator.bin"));
    names.push_back("generator.bin");
  }
  ordered_json training = {{"encoder_loss", p.encoder_loss}, {"generator_loss", p.generator_loss}};
  if (p.mining) training["mining"] = MiningStatsToJson(*p.mining);
  WriteStringToFile(path("training.json"), training.dump(2) + "\n");
  names.push_back("training.json");
  return names;
}

Pipeline LoadPipeline(const std::string& dir) {
  const auto path = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };
  const auto exists = [&](const char* name) { return std::filesystem::exists(path(name)); };
  Pipeline p;
  json raw;
  try {
    raw = json::parse(ReadFileToString(path("config.json")));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfigError, path("config.json") + ": " + e.what());
  }
  p.config = RunConfigFromJson(raw);
  auto require = [&](const char* name) {
    if (!exists(name)) throw Error(ErrorCode::kConfigError, "missing artifact " + path(name));
  };
  switch (p.config.retrieval) {
    case RetrievalMethod::kNone:
      break;
    case RetrievalMethod::kBm25:
      require("bm25.bin");
      p.bm25 = Bm25Index::Load(path("bm25.bin"));
      break;
    default:
      require("encoder.bin");
      require("index.bin");
      p.encoder = DualEncoder::Load(path("encoder.bin"));
      p.index = NeuralIndex::Load(path("index.bin"));
      break;
  }
  if (p.config.generator.kind == GeneratorKind::kToySeq2Seq) {
    require("generator.bin");
    p.generator = Seq2SeqModel::Load(path("generator.bin"));
  }
  return p;
}

EvalReport EvaluatePipeline(const Pipeline& pipeline, const Corpus& test, EvalMode mode) {
  const RunConfig& cfg = pipeline.config;
  if (cfg.generator.kind == GeneratorKind::kToySeq2Seq && !pipeline.generator) {
    throw Error(ErrorCode::kConfigError, "pipeline has no trained generator");
  }
  const std::unique_ptr<Retriever> retriever = pipeline.MakeRetriever();
  const Seq2SeqModel* model = pipeline.generator ? &*pipeline.generator : nullptr;
  auto generate = [&](const DialogueContext& ctx, const ContextExample& gold) {
    std::vector<LevSpan> retrieved;
    if (retriever) {
      for (Retrieved& r : retriever->Retrieve(ctx, cfg.k, ctx.dialogue_id)) {
        retrieved.push_back(std::move(r.payload.lev));
      }
    }
    // The oracle reproduces the gold delta relative to the state it is given.
    const LevSpan oracle = LevDiff(ctx.prev_state, gold.gold_state);
    return Generate(cfg.generator, model, ctx, retrieved, &oracle);
  };
  EvalReport report = RunEval(test, generate, mode, cfg.sde_variant);
  report.config = RunConfigToJson(cfg);
  return report;
}

std::vector<GridCell> AblationGrid(std::string_view grid, const RunConfig& base) {
  std::vector<GridCell> cells;
  if (grid == "table3") {
    for (RetrievalMethod m : {RetrievalMethod::kNone, RetrievalMethod::kBm25,
                              RetrievalMethod::kNeuralUntrained, RetrievalMethod::kNeuralFinetuned}) {
      RunConfig c = base;
      c.retrieval = m;
      c.k = 1;
      c.generator.conditioning = Conditioning::kEncoder;
      cells.push_back({RetrievalMethodName(m), c});
    }
  } else if (grid == "table4") {
    for (bool prev : {true, false}) {
      for (bool delex : {true, false}) {
        for (int k : {1, 3}) {
          RunConfig c = base;
          c.retrieval = RetrievalMethod::kNeuralFinetuned;
          c.index_prev_state = prev;
          c.index_delex = delex;
          c.k = k;
          c.generator.conditioning = Conditioning::kEncoder;
          cells.push_back({std::string("prev ") + (prev ? "yes" : "no") + ", delex " +
                               (delex ? "yes" : "no") + ", top" + std::to_string(k),
                           c});
        }
      }
    }
  } else if (grid == "table5") {
    for (Conditioning cond : {Conditioning::kEncoder, Conditioning::kDecoder}) {
      RunConfig c = base;
      c.retrieval = RetrievalMethod::kNeuralFinetuned;
      c.k = 1;
      c.generator.kind = GeneratorKind::kToySeq2Seq;
      c.generator.conditioning = cond;
      cells.push_back({std::string(ConditioningName(cond)) + " conditioning", c});
    }
  } else {
    throw Error(ErrorCode::kConfigError, "unknown grid '" + std::string(grid) + "'");
  }
  return cells;
}

}  // namespace levdex
