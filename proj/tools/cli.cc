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

#include "cli.h"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "levdex/binary_io.h"
#include "levdex/pipeline.h"
#include "levdex/random.h"

namespace levdex::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kManifestVersion = 1;

json ParseJsonFile(const std::string& path) {
  try {
    return json::parse(ReadFileToString(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfigError, path + ": " + e.what());
  }
}

// Everything a run records about itself.
class RunRecord {
 public:
  RunRecord(std::string command, std::vector<std::string> args, fs::path out)
      : command_(std::move(command)), args_(std::move(args)), out_(std::move(out)) {
    fs::create_directories(out_);
  }

  void Input(const std::string& path) {
    if (!fs::exists(path)) throw Error(ErrorCode::kIoError, "no such file: " + path);
    inputs_[path] = HashFile(path);
  }

  // Path of a named output file inside the run directory.
  std::string Output(const std::string& name) {
    outputs_.push_back(name);
    return (out_ / name).string();
  }

  void SetConfig(const RunConfig& cfg) { config_ = RunConfigToJson(cfg); }

  void WriteManifest() const {
    ordered_json outputs = ordered_json::object();
    for (const std::string& name : outputs_) outputs[name] = HashFile((out_ / name).string());
    ordered_json inputs = ordered_json::object();
    for (const auto& [path, hash] : inputs_) inputs[path] = hash;
    const char* env = std::getenv("LEVDEX_SEED");
    ordered_json m = {
        {"manifest_version", kManifestVersion},
        {"command", command_},
        {"args", args_},
        {"cwd", fs::current_path().string()},
        {"levdex_seed", env ? ordered_json(env) : ordered_json(nullptr)},
        {"config", config_},
        {"inputs", inputs},
        {"outputs", outputs},
    };
    WriteStringToFile((out_ / "manifest.json").string(), m.dump(2) + "\n");
  }

  const fs::path& out() const { return out_; }

 private:
  std::string command_;
  std::vector<std::string> args_;
  fs::path out_;
  ordered_json config_ = nullptr;
  std::map<std::string, std::string> inputs_;
  std::vector<std::string> outputs_;
};

// Flags that override fields of the run config.
struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
  std::optional<std::uint64_t> data_seed;
  std::string train;
  std::string test;
  std::optional<std::string> retrieval;
  std::optional<int> k;
  std::optional<bool> index_prev_state;
  std::optional<bool> index_delex;
  std::optional<bool> bm25_delex;
  std::optional<double> k1;
  std::optional<double> b;
  std::optional<int> top;
  std::optional<bool> exclude_same_dialogue;
  std::optional<bool> match_values;
  std::optional<int> dim;
  std::optional<int> encoder_epochs;
  std::optional<double> encoder_lr;
  std::optional<std::string> encoder_optimizer;
  std::optional<std::string> generator;
  std::optional<std::string> conditioning;
  std::optional<int> generator_epochs;
  std::optional<int> hidden;
  std::optional<std::string> sde_variant;
};

void AddConfigOptions(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON run config")->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "run seed (overrides config and LEVDEX_SEED)");
  app->add_option("--data-seed", o.data_seed, "seed of the synthetic corpora");
  app->add_option("--train", o.train, "training corpus (jsonl)")->check(CLI::ExistingFile);
  app->add_option("--test", o.test, "test corpus (jsonl)")->check(CLI::ExistingFile);
}

void AddRetrievalOptions(CLI::App* app, Overrides& o) {
  app->add_option("--retrieval", o.retrieval,
                  "none, bm25, neural-untrained, neural-finetuned or random");
  app->add_option("--k", o.k, "retrieved spans per turn");
  app->add_option("--index-prev-state", o.index_prev_state, "keep the previous state in keys");
  app->add_option("--index-delex", o.index_delex, "delexicalize neural index keys");
  app->add_option("--bm25-delex", o.bm25_delex, "delexicalize bm25 documents");
  app->add_option("--k1", o.k1, "bm25 k1");
  app->add_option("--b", o.b, "bm25 b");
  app->add_option("--top", o.top, "bm25 candidates per mined anchor");
  app->add_option("--exclude-same-dialogue", o.exclude_same_dialogue,
                  "drop mining candidates from the anchor's dialogue");
  app->add_option("--match-values", o.match_values, "mine on slot values as well as names");
  app->add_option("--dim", o.dim, "encoder dimension");
  app->add_option("--encoder-epochs", o.encoder_epochs, "encoder epochs");
  app->add_option("--encoder-lr", o.encoder_lr, "encoder learning rate");
  app->add_option("--encoder-optimizer", o.encoder_optimizer, "sgd or adam");
}

void AddGeneratorOptions(CLI::App* app, Overrides& o) {
  app->add_option("--generator", o.generator, "toy-seq2seq, copy-retrieval or oracle");
  app->add_option("--conditioning", o.conditioning, "encoder or decoder");
  app->add_option("--epochs", o.generator_epochs, "generator epochs");
  app->add_option("--hidden", o.hidden, "generator width (all layers)");
  app->add_option("--sde-variant", o.sde_variant, "turn or micro");
}

RunConfig ResolveConfig(const Overrides& o, RunRecord& record) {
  RunConfig cfg;
  if (!o.config.empty()) {
    record.Input(o.config);
    cfg = RunConfigFromJson(ParseJsonFile(o.config));
  }
  ApplySeedOverride(cfg);
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.seeds = {*o.seed};
  }
  if (!o.seeds.empty()) cfg.seeds = o.seeds;
  if (o.data_seed) cfg.data_seed = *o.data_seed;
  if (!o.train.empty()) cfg.train_corpus = o.train;
  if (!o.test.empty()) cfg.test_corpus = o.test;
  if (!o.train.empty() || !o.test.empty()) cfg.corpus_format = CorpusFormat::kJsonl;
  if (o.retrieval) cfg.retrieval = ParseRetrievalMethod(*o.retrieval);
  if (o.k) cfg.k = *o.k;
  if (o.index_prev_state) cfg.index_prev_state = *o.index_prev_state;
  if (o.index_delex) cfg.index_delex = *o.index_delex;
  if (o.bm25_delex) cfg.bm25_delex = *o.bm25_delex;
  if (o.k1) cfg.bm25.k1 = *o.k1;
  if (o.b) cfg.bm25.b = *o.b;
  if (o.top) cfg.mining.top = *o.top;
  if (o.exclude_same_dialogue) cfg.mining.exclude_same_dialogue = *o.exclude_same_dialogue;
  if (o.match_values) cfg.mining.match_values = *o.match_values;
  if (o.dim) cfg.encoder.dim = *o.dim;
  if (o.encoder_epochs) cfg.encoder.epochs = *o.encoder_epochs;
  if (o.encoder_lr) cfg.encoder.learning_rate = *o.encoder_lr;
  if (o.encoder_optimizer) cfg.encoder.optimizer = ParseOptimizerKind(*o.encoder_optimizer);
  if (o.generator) cfg.generator.kind = ParseGeneratorKind(*o.generator);
  if (o.conditioning) cfg.generator.conditioning = ParseConditioning(*o.conditioning);
  if (o.generator_epochs) cfg.seq2seq.epochs = *o.generator_epochs;
  if (o.hidden) {
    cfg.seq2seq.dims.emb = cfg.seq2seq.dims.hidden = cfg.seq2seq.dims.dec =
        cfg.seq2seq.dims.att = *o.hidden;
  }
  if (o.sde_variant) cfg.sde_variant = ParseSdeVariant(*o.sde_variant);
  ValidateRunConfig(cfg);
  if (!cfg.train_corpus.empty()) {
    record.Input(cfg.train_corpus);
    record.Input(cfg.test_corpus);
  }
  record.SetConfig(cfg);
  return cfg;
}

// Training contexts from --corpus when given, otherwise from the config.
std::vector<ContextExample> TrainingContexts(const std::string& corpus_path,
                                             const RunConfig& cfg, RunRecord& record) {
  if (!corpus_path.empty()) {
    record.Input(corpus_path);
    return EnumerateContexts(LoadCorpus(corpus_path, CorpusFormat::kJsonl, Split::kTrain));
  }
  return LoadDatasets(cfg).train_examples;
}

void WriteCorpus(const Corpus& corpus, const std::string& path) {
  WriteStringToFile(path, CorpusToJsonl(corpus));
}

ordered_json CorpusSummary(const Corpus& corpus) {
  std::size_t turns = 0;
  for (const Dialogue& d : corpus.dialogues) turns += d.turns.size();
  return {{"split", SplitName(corpus.split)},
          {"dialogues", corpus.dialogues.size()},
          {"turns", turns},
          {"hash", HexDigest(Fnv1a64(CorpusToJsonl(corpus)))}};
}

std::string DataHash(const Datasets& data) {
  return HexDigest(Fnv1a64(CorpusToJsonl(data.train) + CorpusToJsonl(data.test)));
}

void PrintFingerprintWarning(const NeuralIndex& index, const DualEncoder& encoder) {
  if (!index.MatchesEncoder(encoder)) {
    std::cerr << "levdex: warning: FINGERPRINT_MISMATCH: index was built with key encoder "
              << HexDigest(index.fingerprint()) << ", loaded encoder is "
              << HexDigest(encoder.KeyFingerprint()) << "\n";
  }
}

std::string EvalTables(const std::string& title, const std::vector<EvalMode>& modes,
                       const std::map<EvalMode, std::vector<TableRow>>& rows) {
  std::string out;
  for (EvalMode mode : modes) {
    if (!out.empty()) out += "\n";
    out += FormatTable(title + " (" + EvalModeName(mode) + ")", rows.at(mode));
  }
  return out;
}

// ---- subcommands ----

struct IngestArgs {
  std::string input;
  std::string format = "jsonl";
  std::string split = "train";
};

void Ingest(const IngestArgs& a, RunRecord& record) {
  record.Input(a.input);
  const Corpus corpus = LoadCorpus(a.input, ParseCorpusFormat(a.format), ParseSplit(a.split));
  WriteCorpus(corpus, record.Output("corpus.jsonl"));
  WriteStringToFile(record.Output("summary.json"), CorpusSummary(corpus).dump(2) + "\n");
}

struct SynthArgs {
  std::optional<int> n;
  std::optional<int> domains;
  std::optional<int> vocab;
  std::string split = "train";
};

void Synth(const SynthArgs& a, const Overrides& o, RunRecord& record) {
  const RunConfig cfg = ResolveConfig(o, record);
  const Split split = ParseSplit(a.split);
  SynthOptions opts;
  // Same derivation as the pipeline so that synthesized files match it.
  opts.seed = DeriveSeed(cfg.data_seed, split == Split::kTrain ? 1 : 2);
  opts.n_dialogues = a.n.value_or(split == Split::kTrain ? cfg.synth.n_train : cfg.synth.n_test);
  opts.n_domains = a.domains.value_or(cfg.synth.n_domains);
  opts.vocab_size = a.vocab.value_or(cfg.synth.vocab_size);
  opts.split = split;
  const Corpus corpus = SynthCorpus(opts);
  WriteCorpus(corpus, record.Output("corpus.jsonl"));
  WriteStringToFile(record.Output("summary.json"), CorpusSummary(corpus).dump(2) + "\n");
}

void BuildBm25(const std::string& corpus, const Overrides& o, RunRecord& record) {
  const RunConfig cfg = ResolveConfig(o, record);
  const auto train = TrainingContexts(corpus, cfg, record);
  Bm25Index::Build(Bm25Documents(train, cfg.Bm25Format()), cfg.bm25)
      .Save(record.Output("bm25.bin"));
}

void MinePairsCommand(const std::string& corpus, const Overrides& o, RunRecord& record) {
  const RunConfig cfg = ResolveConfig(o, record);
  const auto train = TrainingContexts(corpus, cfg, record);
  const MiningResult mined = MinePairs(train, BuildMiningIndex(train, cfg), cfg);
  std::ostringstream out;
  WritePairs(mined.pairs, out);
  WriteStringToFile(record.Output("pairs.jsonl"), out.str());
  WriteStringToFile(record.Output("mining.json"), MiningStatsToJson(mined.stats).dump(2) + "\n");
  std::cout << "mined " << mined.stats.n_pairs << " pairs, mean positive f1 "
            << mined.stats.mean_positive_f1 << "\n";
}

void TrainEncoder(const std::string& corpus, const std::string& pairs_path, bool untrained,
                  const Overrides& o, RunRecord& record) {
  const RunConfig cfg = ResolveConfig(o, record);
  const auto train = TrainingContexts(corpus, cfg, record);
  ordered_json training;
  if (untrained) {
    UntrainedEncoder(train, cfg).Save(record.Output("encoder.bin"));
    training["loss"] = ordered_json::array();
  } else {
    if (pairs_path.empty()) throw Error(ErrorCode::kUsage, "train-encoder needs --pairs");
    record.Input(pairs_path);
    std::ifstream in(pairs_path);
    const std::vector<TrainingPair> pairs = ReadPairs(in);
    const EncoderTrainResult result = FineTuneEncoder(train, pairs, cfg);
    result.encoder.Save(record.Output("encoder.bin"));
    training["loss"] = result.loss_curve;
    std::cout << "encoder loss " << result.loss_curve.front() << " -> "
              << result.loss_curve.back() << "\n";
  }
  WriteStringToFile(record.Output("training.json"), training.dump(2) + "\n");
}

void BuildIndex(const std::string& corpus, const std::string& encoder_path, const Overrides& o,
                RunRecord& record) {
  const RunConfig cfg = ResolveConfig(o, record);
  const auto train = TrainingContexts(corpus, cfg, record);
  record.Input(encoder_path);
  const DualEncoder encoder = DualEncoder::Load(encoder_path);
  NeuralIndex::Build(encoder, train, cfg.IndexFormat()).Save(record.Output("index.bin"));
}

struct RetrieveArgs {
  std::string queries;
  std::string bm25;
  std::string index;
  std::string encoder;
};

void RetrieveCommand(const RetrieveArgs& a, const Overrides& o, RunRecord& record) {
  const RunConfig cfg = ResolveConfig(o, record);
  std::vector<ContextExample> queries;
  if (!a.queries.empty()) {
    record.Input(a.queries);
    queries = EnumerateContexts(LoadCorpus(a.queries, CorpusFormat::kJsonl, Split::kTest));
  } else {
    queries = EnumerateContexts(LoadDatasets(cfg).test);
  }
  std::optional<Bm25Index> bm25;
  std::optional<NeuralIndex> index;
  std::optional<DualEncoder> encoder;
  std::unique_ptr<Retriever> retriever;
  if (!a.bm25.empty()) {
    record.Input(a.bm25);
    bm25 = Bm25Index::Load(a.bm25);
    retriever = std::make_unique<Bm25Retriever>(*bm25, cfg.Bm25Format());
  } else if (!a.index.empty() && !a.encoder.empty()) {
    record.Input(a.index);
    record.Input(a.encoder);
    index = NeuralIndex::Load(a.index);
    encoder = DualEncoder::Load(a.encoder);
    PrintFingerprintWarning(*index, *encoder);
    retriever = std::make_unique<NeuralRetriever>(*index, *encoder);
  } else {
    throw Error(ErrorCode::kUsage, "retrieve needs --bm25 or both --index and --encoder");
  }
  std::string out;
  for (const ContextExample& q : queries) {
    ordered_json results = ordered_json::array();
    for (const Retrieved& r : retriever->Retrieve(q.context, cfg.k, q.context.dialogue_id)) {
      results.push_back({{"score", r.score},
                         {"lev", SerializeState(r.payload.lev)},
                         {"dialogue_id", r.payload.dialogue_id},
                         {"turn_index", r.payload.turn_index}});
    }
    const ordered_json line = {{"dialogue_id", q.context.dialogue_id},
                               {"turn_index", q.context.turn_index},
                               {"gold_lev", SerializeState(q.gold_lev)},
                               {"results", results}};
    out += line.dump() + "\n";
  }
  WriteStringToFile(record.Output("retrieved.jsonl"), out);
}

void TrainDst(const Overrides& o, RunRecord& record) {
  const RunConfig cfg = ResolveConfig(o, record);
  const Pipeline pipeline = FitPipeline(cfg, LoadDatasets(cfg));
  for (const std::string& name : SavePipeline(pipeline, record.out().string())) {
    record.Output(name);
  }
  if (!pipeline.generator_loss.empty()) {
    std::cout << "generator loss " << pipeline.generator_loss.front() << " -> "
              << pipeline.generator_loss.back() << "\n";
  }
}

void Evaluate(const std::string& model_dir, const Overrides& o, RunRecord& record) {
  RunConfig cfg;
  Pipeline pipeline;
  if (!model_dir.empty()) {
    pipeline = LoadPipeline(model_dir);
    for (const char* name : {"config.json", "bm25.bin", "encoder.bin", "index.bin", "generator.bin"}) {
      const fs::path p = fs::path(model_dir) / name;
      if (fs::exists(p)) record.Input(p.string());
    }
    // Only evaluation-side settings may change for a trained model.
    cfg = pipeline.config;
    if (o.sde_variant) cfg.sde_variant = ParseSdeVariant(*o.sde_variant);
    if (!o.test.empty()) {
      cfg.test_corpus = o.test;
      if (cfg.train_corpus.empty()) cfg.train_corpus = o.test;
    }
    if (!cfg.train_corpus.empty()) {
      record.Input(cfg.train_corpus);
      record.Input(cfg.test_corpus);
    }
    record.SetConfig(cfg);
    pipeline.config.sde_variant = cfg.sde_variant;
  } else {
    cfg = ResolveConfig(o, record);
  }
  const Datasets data = LoadDatasets(cfg);
  if (model_dir.empty()) pipeline = FitPipeline(cfg, data);
  std::map<EvalMode, std::vector<TableRow>> rows;
  for (EvalMode mode : cfg.eval_modes) {
    const EvalReport report = EvaluatePipeline(pipeline, data.test, mode);
    ordered_json j = ReportToJson(report);
    j["data_hash"] = DataHash(data);
    WriteStringToFile(record.Output(std::string("report-") + EvalModeName(mode) + ".json"),
                      j.dump(2) + "\n");
    rows[mode].push_back({RetrievalMethodName(cfg.retrieval), report.jga,
                          report.slot_detection_error});
  }
  const std::string table = EvalTables("evaluate", cfg.eval_modes, rows);
  WriteStringToFile(record.Output("table.txt"), table);
  std::cout << table;
}

void Ablate(const std::string& grid, const Overrides& o, RunRecord& record) {
  const RunConfig base = ResolveConfig(o, record);
  const Datasets data = LoadDatasets(base);
  const std::string data_hash = DataHash(data);
  std::map<EvalMode, std::vector<TableRow>> rows;
  ordered_json cells = ordered_json::array();
  for (const GridCell& cell : AblationGrid(grid, base)) {
    ordered_json per_seed = ordered_json::array();
    std::map<EvalMode, TableRow> sums;
    for (std::uint64_t seed : cell.config.seeds) {
      RunConfig cfg = cell.config;
      cfg.seed = seed;
      const Pipeline pipeline = FitPipeline(cfg, data);
      ordered_json entry = {{"seed", seed}};
      for (EvalMode mode : cfg.eval_modes) {
        const EvalReport report = EvaluatePipeline(pipeline, data.test, mode);
        entry[EvalModeName(mode)] = {{"jga", report.jga}, {"sde", report.slot_detection_error}};
        sums[mode].jga += report.jga;
        sums[mode].sde += report.slot_detection_error;
      }
      per_seed.push_back(entry);
      std::cerr << "levdex: " << cell.label << " seed " << seed << " done\n";
    }
    const double n = static_cast<double>(cell.config.seeds.size());
    ordered_json mean = ordered_json::object();
    for (EvalMode mode : cell.config.eval_modes) {
      const TableRow row{cell.label, sums[mode].jga / n, sums[mode].sde / n};
      rows[mode].push_back(row);
      mean[EvalModeName(mode)] = {{"jga", row.jga}, {"sde", row.sde}};
    }
    cells.push_back({{"label", cell.label},
                     {"config", RunConfigToJson(cell.config)},
                     {"data_hash", data_hash},
                     {"per_seed", per_seed},
                     {"mean", mean}});
  }
  const ordered_json out = {{"grid", grid}, {"cells", cells}};
  WriteStringToFile(record.Output("ablate.json"), out.dump(2) + "\n");
  const std::string table = EvalTables(grid, base.eval_modes, rows);
  WriteStringToFile(record.Output("table.txt"), table);
  std::cout << table;
}

// Re-runs a recorded invocation into `out` and compares output hashes.
int Replay(const std::string& manifest_path, const std::string& out) {
  const json m = ParseJsonFile(manifest_path);
  if (!m.contains("manifest_version") || m["manifest_version"] != kManifestVersion) {
    throw Error(ErrorCode::kVersionMismatch, manifest_path + ": unsupported manifest version");
  }
  const fs::path target = fs::absolute(out);
  const fs::path cwd = m.at("cwd").get<std::string>();
  std::vector<std::string> args = m.at("args").get<std::vector<std::string>>();
  bool replaced = false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out" && i + 1 < args.size()) {
      if (fs::weakly_canonical(cwd / args[i + 1]) == fs::weakly_canonical(target)) {
        throw Error(ErrorCode::kUsage, "replay --out must differ from the recorded output");
      }
      args[i + 1] = target.string();
      replaced = true;
    }
  }
  if (!replaced) throw Error(ErrorCode::kConfigError, "manifest args carry no --out");

  const fs::path saved_cwd = fs::current_path();
  const char* saved_env = std::getenv("LEVDEX_SEED");
  const std::optional<std::string> saved_seed =
      saved_env ? std::optional<std::string>(saved_env) : std::nullopt;
  fs::current_path(cwd);
  for (const auto& [path, hash] : m.at("inputs").items()) {
    if (!fs::exists(path) || HashFile(path) != hash.get<std::string>()) {
      fs::current_path(saved_cwd);
      throw Error(ErrorCode::kIoError, "input changed since the recorded run: " + path);
    }
  }
  if (m.at("levdex_seed").is_string()) {
    setenv("LEVDEX_SEED", m["levdex_seed"].get<std::string>().c_str(), 1);
  } else {
    unsetenv("LEVDEX_SEED");
  }
  const int code = Run(args);
  fs::current_path(saved_cwd);
  if (saved_seed) {
    setenv("LEVDEX_SEED", saved_seed->c_str(), 1);
  } else {
    unsetenv("LEVDEX_SEED");
  }
  if (code != kExitOk) return code;

  int differing = 0;
  for (const auto& [name, hash] : m.at("outputs").items()) {
    const fs::path p = target / name;
    const bool same = fs::exists(p) && HashFile(p.string()) == hash.get<std::string>();
    std::cout << (same ? "identical " : "DIFFERS   ") << name << "\n";
    if (!same) ++differing;
  }
  std::cout << "replay: " << m.at("outputs").size() - differing << " of "
            << m.at("outputs").size() << " outputs identical\n";
  return differing == 0 ? kExitOk : kExitFailure;
}

int Dispatch(const std::vector<std::string>& args) {
  CLI::App app{"levdex: retrieval-augmented dialogue state tracking"};
  app.name("levdex");
  app.require_subcommand(1);

  std::string out;
  Overrides o;
  auto with_out = [&](CLI::App* sub) {
    sub->add_option("--out", out, "output directory")->required();
  };

  IngestArgs ingest_args;
  CLI::App* ingest = app.add_subcommand("ingest", "canonicalize a corpus into jsonl");
  ingest->add_option("--input", ingest_args.input, "corpus file")->required();
  ingest->add_option("--format", ingest_args.format, "jsonl or multiwoz-json");
  ingest->add_option("--split", ingest_args.split, "train or test");
  with_out(ingest);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "write a synthetic corpus");
  synth->add_option("--config", o.config, "JSON run config")->check(CLI::ExistingFile);
  synth->add_option("--data-seed", o.data_seed, "corpus seed");
  synth->add_option("--n", synth_args.n, "number of dialogues");
  synth->add_option("--domains", synth_args.domains, "number of domains");
  synth->add_option("--vocab", synth_args.vocab, "values per slot");
  synth->add_option("--split", synth_args.split, "train or test");
  with_out(synth);

  std::string corpus;
  auto with_corpus = [&](CLI::App* sub) {
    sub->add_option("--corpus", corpus, "training corpus (jsonl); default from config")
        ->check(CLI::ExistingFile);
  };

  CLI::App* bm25 = app.add_subcommand("build-bm25", "build the bm25 index of training contexts");
  AddConfigOptions(bm25, o);
  AddRetrievalOptions(bm25, o);
  with_corpus(bm25);
  with_out(bm25);

  CLI::App* mine = app.add_subcommand("mine-pairs", "mine positive and negative contexts");
  AddConfigOptions(mine, o);
  AddRetrievalOptions(mine, o);
  with_corpus(mine);
  with_out(mine);

  std::string pairs_path;
  bool untrained = false;
  CLI::App* train_enc = app.add_subcommand("train-encoder", "train the dual encoder");
  AddConfigOptions(train_enc, o);
  AddRetrievalOptions(train_enc, o);
  with_corpus(train_enc);
  train_enc->add_option("--pairs", pairs_path, "mined pairs (jsonl)")->check(CLI::ExistingFile);
  train_enc->add_flag("--untrained", untrained, "write the initial encoder without training");
  train_enc->add_option("--epochs", o.encoder_epochs, "encoder epochs");
  with_out(train_enc);

  std::string encoder_path;
  CLI::App* build_index = app.add_subcommand("build-index", "encode training contexts");
  AddConfigOptions(build_index, o);
  AddRetrievalOptions(build_index, o);
  with_corpus(build_index);
  build_index->add_option("--encoder", encoder_path, "encoder file")
      ->required()
      ->check(CLI::ExistingFile);
  with_out(build_index);

  RetrieveArgs retrieve_args;
  CLI::App* retrieve = app.add_subcommand("retrieve", "retrieve spans for test contexts");
  AddConfigOptions(retrieve, o);
  AddRetrievalOptions(retrieve, o);
  retrieve->add_option("--queries", retrieve_args.queries, "query corpus (jsonl)")
      ->check(CLI::ExistingFile);
  retrieve->add_option("--bm25", retrieve_args.bm25, "bm25 index")->check(CLI::ExistingFile);
  retrieve->add_option("--index", retrieve_args.index, "neural index")->check(CLI::ExistingFile);
  retrieve->add_option("--encoder", retrieve_args.encoder, "encoder")->check(CLI::ExistingFile);
  with_out(retrieve);

  CLI::App* train_dst = app.add_subcommand("train-dst", "fit retrieval and the generator");
  AddConfigOptions(train_dst, o);
  AddRetrievalOptions(train_dst, o);
  AddGeneratorOptions(train_dst, o);
  with_out(train_dst);

  std::string model_dir;
  CLI::App* evaluate = app.add_subcommand("evaluate", "report JGA and slot detection error");
  AddConfigOptions(evaluate, o);
  AddRetrievalOptions(evaluate, o);
  AddGeneratorOptions(evaluate, o);
  evaluate->add_option("--model", model_dir, "output directory of train-dst")
      ->check(CLI::ExistingDirectory);
  with_out(evaluate);

  std::string grid;
  CLI::App* ablate = app.add_subcommand("ablate", "evaluate every cell of a grid");
  AddConfigOptions(ablate, o);
  AddRetrievalOptions(ablate, o);
  AddGeneratorOptions(ablate, o);
  ablate->add_option("--grid", grid, "table3, table4 or table5")
      ->required()
      ->check(CLI::IsMember({"table3", "table4", "table5"}));
  ablate->add_option("--seeds", o.seeds, "seeds to average over")->delimiter(',');
  with_out(ablate);

  std::string manifest;
  CLI::App* replay = app.add_subcommand("replay", "rerun a manifest and compare outputs");
  replay->add_option("--manifest", manifest, "manifest.json of a run")
      ->required()
      ->check(CLI::ExistingFile);
  with_out(replay);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "levdex: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub == replay) return Replay(manifest, out);

  RunRecord record(sub->get_name(), args, out);
  if (sub == ingest) {
    Ingest(ingest_args, record);
  } else if (sub == synth) {
    Synth(synth_args, o, record);
  } else if (sub == bm25) {
    BuildBm25(corpus, o, record);
  } else if (sub == mine) {
    MinePairsCommand(corpus, o, record);
  } else if (sub == train_enc) {
    TrainEncoder(corpus, pairs_path, untrained, o, record);
  } else if (sub == build_index) {
    BuildIndex(corpus, encoder_path, o, record);
  } else if (sub == retrieve) {
    RetrieveCommand(retrieve_args, o, record);
  } else if (sub == train_dst) {
    TrainDst(o, record);
  } else if (sub == evaluate) {
    Evaluate(model_dir, o, record);
  } else if (sub == ablate) {
    Ablate(grid, o, record);
  }
  record.WriteManifest();
  return kExitOk;
}

}  // namespace

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage:
      return kExitUsage;
    case ErrorCode::kConfigError:
    case ErrorCode::kParseError:
    case ErrorCode::kSchemaError:
    case ErrorCode::kVersionMismatch:
      return kExitConfig;
    case ErrorCode::kIoError:
      return kExitIo;
    case ErrorCode::kNonFinite:
      return kExitNonFinite;
    default:
      return kExitFailure;
  }
}

int Run(const std::vector<std::string>& args) {
  try {
    return Dispatch(args);
  } catch (const Error& e) {
    std::cerr << "levdex: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "levdex: IO_ERROR: " << e.what() << "\n";
    return kExitIo;
  } catch (const json::exception& e) {
    std::cerr << "levdex: CONFIG_ERROR: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "levdex: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace levdex::cli
