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

#ifndef LEVDEX_DIALOGUE_H_
#define LEVDEX_DIALOGUE_H_

#include <cstddef>
#include <map>
#include <string>
#include <string_view>

namespace levdex {

// Serialized deletion marker inside a LevSpan.
inline constexpr std::string_view kNullMarker = "NULL";
// Value placeholder written into a delexicalized previous state.
inline constexpr std::string_view kDelexValue = "[v]";

using SlotValues = std::map<std::string, std::string>;
// domain -> slot -> value. std::map gives the canonical sorted iteration.
using SlotMap = std::map<std::string, SlotValues>;

// Accumulated belief state after a turn. Values are lowercase, non-empty and
// never the deletion marker; domains without slots are absent.
struct DialogueState {
  SlotMap domains;

  bool empty() const { return domains.empty(); }
  std::size_t num_slots() const;
  friend bool operator==(const DialogueState&, const DialogueState&) = default;
};

// Delta between two consecutive states. A value equal to kNullMarker deletes
// the slot. The empty span means "no change".
struct LevSpan {
  SlotMap domains;

  bool empty() const { return domains.empty(); }
  std::size_t num_slots() const;
  friend bool operator==(const LevSpan&, const LevSpan&) = default;
};

struct Turn {
  std::string user;
  std::string system;  // empty on the final turn
  DialogueState state;

  friend bool operator==(const Turn&, const Turn&) = default;
};

// Input of one tracking step: the state before the turn, the previous
// exchange and the new user utterance.
struct DialogueContext {
  DialogueState prev_state;
  std::string prev_user;
  std::string prev_system;
  std::string curr_user;
  std::string dialogue_id;
  int turn_index = 0;

  friend bool operator==(const DialogueContext&, const DialogueContext&) = default;
};

// Lowercases and collapses whitespace runs to single spaces, trimming both ends.
std::string NormalizeText(std::string_view text);

// Validates and canonicalizes a raw state. Empty values and empty domains are
// dropped. Throws RESERVED_VALUE for a "null" value, a value or name holding
// ',', '[', ']' or a separator token, or a name containing whitespace.
DialogueState Canonicalize(const SlotMap& raw);

// Same rules, except that a case-insensitive "null" value becomes kNullMarker.
LevSpan CanonicalizeLevSpan(const SlotMap& raw);

// "[dom1] slot1 val1, slot2 val2 [dom2] slot val"; empty input gives "".
std::string SerializeState(const SlotMap& slots);
inline std::string SerializeState(const DialogueState& s) { return SerializeState(s.domains); }
inline std::string SerializeState(const LevSpan& s) { return SerializeState(s.domains); }

// Lenient parser used on generator output. Text before the first "[domain]"
// header is discarded, pairs without a value are dropped, and "null" in any
// case becomes the deletion marker.
LevSpan ParseLevSpan(std::string_view text);

// Strict parser. Throws PARSE_ERROR carrying the byte offset of the first
// malformed construct.
LevSpan ParseLevSpanStrict(std::string_view text);

// Lenient parse that drops deletion entries.
DialogueState ParseState(std::string_view text);

LevSpan LevDiff(const DialogueState& prev, const DialogueState& curr);
DialogueState LevApply(const DialogueState& prev, const LevSpan& lev);

enum class SlotMatch {
  kName,           // (domain, slot) pairs
  kNameAndValue,   // (domain, slot, value) triples
};

// F1 between the slot sets of two spans. Both empty scores 1, one empty 0.
double SlotF1(const LevSpan& a, const LevSpan& b, SlotMatch match = SlotMatch::kName);

// Replaces every value of ctx.prev_state by kDelexValue and every
// word-bounded occurrence of a value from prev_state or gold_curr in the
// three utterances by "[value_<slot>]". Longer values are replaced first and
// text already inside brackets is never rewritten.
DialogueContext Delexicalize(const DialogueContext& ctx, const DialogueState& gold_curr);

}  // namespace levdex

#endif  // LEVDEX_DIALOGUE_H_
