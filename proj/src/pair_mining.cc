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

#include "levdex/pair_mining.h"

#include <algorithm>
#include <istream>
#include <ostream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "levdex/error.h"

namespace levdex {
namespace {

using nlohmann::ordered_json;

ordered_json ExampleToJson(const ContextExample& ex) {
  const DialogueContext& c = ex.context;
  return ordered_json{{"dialogue_id", c.dialogue_id},
                      {"turn_index", c.turn_index},
                      {"prev_state", SerializeState(c.prev_state)},
                      {"prev_user", c.prev_user},
                      {"prev_system", c.prev_system},
                      {"curr_user", c.curr_user},
                      {"lev", SerializeState(ex.gold_lev)}};
}

ContextExample ExampleFromJson(const nlohmann::json& node) {
  ContextExample ex;
  DialogueContext& c = ex.context;
  c.dialogue_id = node.at("dialogue_id").get<std::string>();
  c.turn_index = node.at("turn_index").get<int>();
  c.prev_state = ParseState(node.at("prev_state").get<std::string>());
  c.prev_user = node.at("prev_user").get<std::string>();
  c.prev_system = node.at("prev_system").get<std::string>();
  c.curr_user = node.at("curr_user").get<std::string>();
  ex.gold_lev = ParseLevSpanStrict(node.at("lev").get<std::string>());
  ex.gold_state = LevApply(c.prev_state, ex.gold_lev);
  return ex;
}

}  // namespace

std::vector<ScoredCandidate> ScoreCandidates(const ContextExample& anchor, const Bm25Index& index,
                                             const MiningOptions& options) {
  std::optional<std::string_view> exclude;
  if (options.exclude_same_dialogue) exclude = anchor.context.dialogue_id;
  // One extra hit so that dropping the anchor still leaves `top` candidates.
  const auto hits = index.TopK(QueryText(anchor.context, options.query_format), options.top + 1,
                               exclude);
  std::vector<ScoredCandidate> out;
  out.reserve(hits.size());
  for (std::size_t rank = 0; rank < hits.size(); ++rank) {
    const DocPayload& p = *hits[rank].payload;
    if (p.dialogue_id == anchor.context.dialogue_id && p.turn_index == anchor.context.turn_index) {
      continue;
    }
    if (out.size() == static_cast<std::size_t>(options.top)) break;
    out.push_back({static_cast<std::size_t>(hits[rank].doc_id), static_cast<int>(out.size()),
                   SlotF1(anchor.gold_lev, p.lev,
                          options.match_values ? SlotMatch::kNameAndValue : SlotMatch::kName)});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ScoredCandidate& a, const ScoredCandidate& b) { return a.f1 > b.f1; });
  return out;
}

TrainingPair MinePair(const ContextExample& anchor, const Bm25Index& index,
                      std::span<const ContextExample> pool, const MiningOptions& options) {
  const std::vector<ScoredCandidate> scored = ScoreCandidates(anchor, index, options);
  if (scored.size() < 2) {
    throw Error(ErrorCode::kInsufficientCandidates,
                anchor.context.dialogue_id + " turn " + std::to_string(anchor.context.turn_index) +
                    " has " + std::to_string(scored.size()) + " candidates");
  }
  const ScoredCandidate& pos = scored.front();
  const ScoredCandidate& neg = scored.back();
  if (pos.doc >= pool.size() || neg.doc >= pool.size()) {
    throw Error(ErrorCode::kInvalidArgument, "index does not match the mining pool");
  }
  return {anchor, pool[pos.doc], pool[neg.doc], pos.f1, neg.f1};
}

MiningResult MineDataset(std::span<const ContextExample> pool, const Bm25Index& index,
                         const MiningOptions& options) {
  MiningResult result;
  result.stats.n_contexts = pool.size();
  for (const ContextExample& anchor : pool) {
    try {
      result.pairs.push_back(MinePair(anchor, index, pool, options));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInsufficientCandidates) throw;
      ++result.stats.n_skipped;
    }
  }
  std::stable_sort(result.pairs.begin(), result.pairs.end(),
                   [](const TrainingPair& a, const TrainingPair& b) {
                     return std::tie(a.anchor.context.dialogue_id, a.anchor.context.turn_index) <
                            std::tie(b.anchor.context.dialogue_id, b.anchor.context.turn_index);
                   });
  MiningStats& s = result.stats;
  s.n_pairs = result.pairs.size();
  std::size_t perfect = 0;
  for (const TrainingPair& p : result.pairs) {
    s.mean_positive_f1 += p.positive_f1;
    s.mean_negative_f1 += p.negative_f1;
    if (p.positive_f1 == 1.0) ++perfect;
  }
  if (s.n_pairs > 0) {
    const double n = static_cast<double>(s.n_pairs);
    s.mean_positive_f1 /= n;
    s.mean_negative_f1 /= n;
    s.frac_positive_perfect = static_cast<double>(perfect) / n;
  }
  return result;
}

nlohmann::json MiningStatsToJson(const MiningStats& stats) {
  return {{"n_contexts", stats.n_contexts},
          {"n_pairs", stats.n_pairs},
          {"n_skipped", stats.n_skipped},
          {"mean_positive_f1", stats.mean_positive_f1},
          {"mean_negative_f1", stats.mean_negative_f1},
          {"frac_positive_perfect", stats.frac_positive_perfect}};
}

void WritePairs(std::span<const TrainingPair> pairs, std::ostream& out) {
  for (const TrainingPair& p : pairs) {
    const ordered_json line{{"anchor", ExampleToJson(p.anchor)},
                            {"positive", ExampleToJson(p.positive)},
                            {"negative", ExampleToJson(p.negative)},
                            {"pos_f1", p.positive_f1},
                            {"neg_f1", p.negative_f1}};
    out << line.dump() << '\n';
  }
}

std::vector<TrainingPair> ReadPairs(std::istream& in) {
  std::vector<TrainingPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const nlohmann::json node = nlohmann::json::parse(line);
      pairs.push_back({ExampleFromJson(node.at("anchor")), ExampleFromJson(node.at("positive")),
                       ExampleFromJson(node.at("negative")), node.at("pos_f1").get<double>(),
                       node.at("neg_f1").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSchemaError, "pairs line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kSchemaError, "pairs line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return pairs;
}

}  // namespace levdex
