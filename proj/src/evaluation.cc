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

#include "levdex/evaluation.h"

#include <algorithm>
#include <cstdio>
#include <set>
#include <utility>

#include "levdex/error.h"
#include "levdex/generator.h"

namespace levdex {
namespace {

std::set<std::pair<std::string, std::string>> SlotNames(const DialogueState& s) {
  std::set<std::pair<std::string, std::string>> names;
  for (const auto& [domain, slots] : s.domains) {
    for (const auto& [slot, value] : slots) names.emplace(domain, slot);
  }
  return names;
}

nlohmann::ordered_json StateJson(const DialogueState& s) { return SerializeState(s); }

}  // namespace

EvalMode ParseEvalMode(std::string_view name) {
  if (name == "propagated") return EvalMode::kPropagated;
  if (name == "ground-truth-prev") return EvalMode::kGroundTruthPrev;
  throw Error(ErrorCode::kConfigError, "unknown eval mode '" + std::string(name) + "'");
}

const char* EvalModeName(EvalMode mode) {
  return mode == EvalMode::kPropagated ? "propagated" : "ground-truth-prev";
}

SdeVariant ParseSdeVariant(std::string_view name) {
  if (name == "turn") return SdeVariant::kTurn;
  if (name == "micro") return SdeVariant::kMicro;
  throw Error(ErrorCode::kConfigError, "unknown sde variant '" + std::string(name) + "'");
}

const char* SdeVariantName(SdeVariant variant) {
  return variant == SdeVariant::kTurn ? "turn" : "micro";
}

double JointGoalAccuracy(std::span<const TurnRecord> turns) {
  if (turns.empty()) throw Error(ErrorCode::kEmptyEval, "no turns to score");
  std::size_t hits = 0;
  for (const TurnRecord& t : turns) hits += t.exact_match ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(turns.size());
}

double SlotDetectionError(std::span<const TurnRecord> turns, SdeVariant variant) {
  if (turns.empty()) throw Error(ErrorCode::kEmptyEval, "no turns to score");
  if (variant == SdeVariant::kTurn) {
    std::size_t misses = 0;
    for (const TurnRecord& t : turns) misses += t.slot_set_match ? 0 : 1;
    return static_cast<double>(misses) / static_cast<double>(turns.size());
  }
  std::size_t diff = 0;
  std::size_t unions = 0;
  for (const TurnRecord& t : turns) {
    const auto p = SlotNames(t.predicted);
    const auto g = SlotNames(t.gold);
    std::size_t common = 0;
    for (const auto& name : p) common += g.count(name);
    diff += p.size() + g.size() - 2 * common;
    unions += p.size() + g.size() - common;
  }
  return unions == 0 ? 0.0 : static_cast<double>(diff) / static_cast<double>(unions);
}

TurnRecord MakeTurnRecord(const ContextExample& gold, std::string generated,
                          DialogueState predicted) {
  TurnRecord r;
  r.dialogue_id = gold.context.dialogue_id;
  r.turn_index = gold.context.turn_index;
  r.generated = std::move(generated);
  r.predicted = std::move(predicted);
  r.gold = gold.gold_state;
  r.exact_match = r.predicted == r.gold;
  r.slot_set_match = SlotNames(r.predicted) == SlotNames(r.gold);
  return r;
}

EvalReport RunEval(const Corpus& corpus, const TurnGenerator& generate, EvalMode mode,
                   SdeVariant variant) {
  EvalReport report;
  report.mode = mode;
  report.sde_variant = variant;
  const std::vector<ContextExample> examples = EnumerateContexts(corpus);
  DialogueState carried;
  for (const ContextExample& ex : examples) {
    DialogueContext ctx = ex.context;
    if (ctx.turn_index == 0) carried = DialogueState{};
    if (mode == EvalMode::kPropagated) ctx.prev_state = carried;
    std::string text = generate(ctx, ex);
    DialogueState predicted = PredictState(ctx.prev_state, text);
    carried = predicted;
    report.per_turn.push_back(MakeTurnRecord(ex, std::move(text), std::move(predicted)));
  }
  report.jga = JointGoalAccuracy(report.per_turn);
  report.slot_detection_error = SlotDetectionError(report.per_turn, variant);
  return report;
}

nlohmann::ordered_json ReportToJson(const EvalReport& report, bool include_turns) {
  nlohmann::ordered_json j;
  j["mode"] = EvalModeName(report.mode);
  j["jga"] = report.jga;
  j["slot_detection_error"] = report.slot_detection_error;
  j["sde_variant"] = SdeVariantName(report.sde_variant);
  j["n_turns"] = report.per_turn.size();
  j["config"] = report.config;
  if (include_turns) {
    nlohmann::ordered_json turns = nlohmann::ordered_json::array();
    for (const TurnRecord& t : report.per_turn) {
      turns.push_back({{"dialogue_id", t.dialogue_id},
                       {"turn_index", t.turn_index},
                       {"generated", t.generated},
                       {"predicted", StateJson(t.predicted)},
                       {"gold", StateJson(t.gold)},
                       {"exact_match", t.exact_match},
                       {"slot_set_match", t.slot_set_match}});
    }
    j["per_turn"] = std::move(turns);
  }
  return j;
}

std::string FormatTable(std::string_view title, std::span<const TableRow> rows) {
  std::size_t width = 6;
  for (const TableRow& r : rows) width = std::max(width, r.label.size());
  std::string out(title);
  out += '\n';
  char line[512];
  std::snprintf(line, sizeof(line), "%-*s  %18s  %27s\n", static_cast<int>(width), "Method",
                "Joint Accuracy (up)", "Slot Detection Error (down)");
  out += line;
  out += std::string(width + 2 + 18 + 2 + 27, '-') + '\n';
  for (const TableRow& r : rows) {
    std::snprintf(line, sizeof(line), "%-*s  %18.2f  %27.2f\n", static_cast<int>(width),
                  r.label.c_str(), 100.0 * r.jga, 100.0 * r.sde);
    out += line;
  }
  return out;
}

}  // namespace levdex
