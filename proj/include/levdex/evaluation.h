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

#ifndef LEVDEX_EVALUATION_H_
#define LEVDEX_EVALUATION_H_

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "levdex/corpus.h"

namespace levdex {

enum class EvalMode { kPropagated, kGroundTruthPrev };
enum class SdeVariant { kTurn, kMicro };

EvalMode ParseEvalMode(std::string_view name);
const char* EvalModeName(EvalMode mode);
SdeVariant ParseSdeVariant(std::string_view name);
const char* SdeVariantName(SdeVariant variant);

struct TurnRecord {
  std::string dialogue_id;
  int turn_index = 0;
  std::string generated;
  DialogueState predicted;
  DialogueState gold;
  bool exact_match = false;
  bool slot_set_match = false;
};

// Fraction of exact state matches. Throws EMPTY_EVAL on no turns.
double JointGoalAccuracy(std::span<const TurnRecord> turns);

// kTurn: fraction of turns whose (domain, slot) name sets differ.
// kMicro: summed symmetric differences of the name sets over summed unions;
// 0 when every set is empty. Throws EMPTY_EVAL on no turns.
double SlotDetectionError(std::span<const TurnRecord> turns, SdeVariant variant = SdeVariant::kTurn);

TurnRecord MakeTurnRecord(const ContextExample& gold, std::string generated,
                          DialogueState predicted);

// Lev text for a turn. `ctx` carries the previous state of the active mode;
// `gold` is the labelled turn, for generators that need it.
using TurnGenerator =
    std::function<std::string(const DialogueContext& ctx, const ContextExample& gold)>;

struct EvalReport {
  EvalMode mode = EvalMode::kPropagated;
  SdeVariant sde_variant = SdeVariant::kTurn;
  double jga = 0.0;
  double slot_detection_error = 0.0;
  std::vector<TurnRecord> per_turn;
  nlohmann::ordered_json config;  // snapshot supplied by the caller
};

// Walks every dialogue turn by turn. In propagated mode the predicted state
// of a turn becomes the previous state of the next; in ground-truth-prev mode
// the gold previous state is always used.
EvalReport RunEval(const Corpus& corpus, const TurnGenerator& generate, EvalMode mode,
                   SdeVariant variant = SdeVariant::kTurn);

nlohmann::ordered_json ReportToJson(const EvalReport& report, bool include_turns = true);

struct TableRow {
  std::string label;
  double jga = 0.0;
  double sde = 0.0;
};

// Fixed-width comparison table, one row per configuration.
std::string FormatTable(std::string_view title, std::span<const TableRow> rows);

}  // namespace levdex

#endif  // LEVDEX_EVALUATION_H_
