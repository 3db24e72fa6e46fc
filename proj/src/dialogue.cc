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

#include "levdex/dialogue.h"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "levdex/error.h"

namespace levdex {
namespace {

bool IsSpace(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool IsWordChar(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0 || u >= 0x80;
}

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool HasReservedChar(std::string_view s) {
  return s.find_first_of(",[]") != std::string_view::npos ||
         s.find("<eos_") != std::string_view::npos;
}

bool IsValidName(std::string_view name) {
  if (name.empty() || HasReservedChar(name)) return false;
  return std::none_of(name.begin(), name.end(), IsSpace);
}

std::size_t CountSlots(const SlotMap& m) {
  std::size_t n = 0;
  for (const auto& [domain, slots] : m) n += slots.size();
  return n;
}

// Shared canonicalization; allow_null maps "null" to the marker instead of
// rejecting it.
SlotMap CanonicalizeSlots(const SlotMap& raw, bool allow_null) {
  SlotMap out;
  for (const auto& [raw_domain, raw_slots] : raw) {
    const std::string domain = NormalizeText(raw_domain);
    if (!IsValidName(domain)) {
      throw Error(ErrorCode::kReservedValue, "invalid domain name '" + raw_domain + "'");
    }
    for (const auto& [raw_slot, raw_value] : raw_slots) {
      const std::string slot = NormalizeText(raw_slot);
      if (!IsValidName(slot)) {
        throw Error(ErrorCode::kReservedValue, "invalid slot name '" + raw_slot + "'");
      }
      std::string value = NormalizeText(raw_value);
      if (value.empty()) continue;
      if (value == "null") {
        if (!allow_null) {
          throw Error(ErrorCode::kReservedValue,
                      "value 'null' is reserved (" + domain + "." + slot + ")");
        }
        value = std::string(kNullMarker);
      } else if (HasReservedChar(value)) {
        throw Error(ErrorCode::kReservedValue,
                    "value '" + value + "' contains a reserved character (" + domain +
                        "." + slot + ")");
      }
      out[domain][slot] = std::move(value);
    }
  }
  return out;
}

struct Header {
  std::size_t begin;  // offset of '['
  std::size_t end;    // offset one past ']'
  std::string name;
};

// Finds the next "[name]" header at or after pos with a valid name.
std::optional<Header> NextHeader(std::string_view text, std::size_t pos) {
  while (true) {
    const std::size_t open = text.find('[', pos);
    if (open == std::string_view::npos) return std::nullopt;
    const std::size_t close = text.find_first_of("[]", open + 1);
    if (close != std::string_view::npos && text[close] == ']') {
      std::string name = Lower(text.substr(open + 1, close - open - 1));
      if (IsValidName(name)) return Header{open, close + 1, std::move(name)};
    }
    pos = open + 1;
  }
}

std::string CanonicalPairValue(std::string_view raw) {
  std::string value = NormalizeText(raw);
  if (value == "null") return std::string(kNullMarker);
  return value;
}

void ParseSegment(std::string_view text, std::size_t seg_begin, std::size_t seg_end,
                  const std::string& domain, bool strict, SlotMap& out) {
  std::size_t piece_begin = seg_begin;
  bool any = false;
  while (piece_begin <= seg_end) {
    std::size_t comma = text.find(',', piece_begin);
    if (comma == std::string_view::npos || comma > seg_end) comma = seg_end;
    const std::string_view piece = text.substr(piece_begin, comma - piece_begin);
    std::size_t first = 0;
    while (first < piece.size() && IsSpace(piece[first])) ++first;
    const bool last_piece = comma == seg_end;
    if (first == piece.size()) {
      // Empty piece: only legal as the whole (empty) segment in lenient mode.
      if (strict) {
        throw Error(ErrorCode::kParseError, "empty slot-value pair", piece_begin);
      }
    } else {
      std::size_t slot_end = first;
      while (slot_end < piece.size() && !IsSpace(piece[slot_end])) ++slot_end;
      const std::string slot = Lower(piece.substr(first, slot_end - first));
      const std::string value = CanonicalPairValue(piece.substr(slot_end));
      const bool ok = IsValidName(slot) && !value.empty() && !HasReservedChar(value);
      if (ok) {
        out[domain][slot] = value;
        any = true;
      } else if (strict) {
        throw Error(ErrorCode::kParseError,
                    value.empty() ? "slot without value" : "malformed slot-value pair",
                    piece_begin + first);
      }
    }
    if (last_piece) break;
    piece_begin = comma + 1;
  }
  if (strict && !any) {
    throw Error(ErrorCode::kParseError, "domain without slots", seg_begin);
  }
}

LevSpan ParseImpl(std::string_view text, bool strict) {
  SlotMap out;
  std::optional<Header> header = NextHeader(text, 0);
  if (strict) {
    const std::size_t limit = header ? header->begin : text.size();
    for (std::size_t i = 0; i < limit; ++i) {
      if (!IsSpace(text[i])) {
        throw Error(ErrorCode::kParseError, "text before first domain header", i);
      }
    }
  }
  while (header) {
    std::optional<Header> next = NextHeader(text, header->end);
    const std::size_t seg_end = next ? next->begin : text.size();
    if (strict) {
      const std::size_t stray =
          text.substr(header->end, seg_end - header->end).find_first_of("[]");
      if (stray != std::string_view::npos) {
        throw Error(ErrorCode::kParseError, "unbalanced bracket", header->end + stray);
      }
    }
    ParseSegment(text, header->end, seg_end, header->name, strict, out);
    header = std::move(next);
  }
  return LevSpan{std::move(out)};
}

}  // namespace

std::size_t DialogueState::num_slots() const { return CountSlots(domains); }
std::size_t LevSpan::num_slots() const { return CountSlots(domains); }

std::string NormalizeText(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (IsSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

DialogueState Canonicalize(const SlotMap& raw) {
  return DialogueState{CanonicalizeSlots(raw, /*allow_null=*/false)};
}

LevSpan CanonicalizeLevSpan(const SlotMap& raw) {
  return LevSpan{CanonicalizeSlots(raw, /*allow_null=*/true)};
}

std::string SerializeState(const SlotMap& slots) {
  std::string out;
  for (const auto& [domain, values] : slots) {
    if (values.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += '[';
    out += domain;
    out += ']';
    bool first = true;
    for (const auto& [slot, value] : values) {
      out += first ? " " : ", ";
      first = false;
      out += slot;
      out.push_back(' ');
      out += value;
    }
  }
  return out;
}

LevSpan ParseLevSpan(std::string_view text) { return ParseImpl(text, /*strict=*/false); }

LevSpan ParseLevSpanStrict(std::string_view text) { return ParseImpl(text, /*strict=*/true); }

DialogueState ParseState(std::string_view text) {
  LevSpan span = ParseLevSpan(text);
  DialogueState state;
  for (auto& [domain, slots] : span.domains) {
    for (auto& [slot, value] : slots) {
      if (value != kNullMarker) state.domains[domain][slot] = std::move(value);
    }
  }
  return state;
}

LevSpan LevDiff(const DialogueState& prev, const DialogueState& curr) {
  LevSpan lev;
  for (const auto& [domain, slots] : curr.domains) {
    const auto prev_domain = prev.domains.find(domain);
    for (const auto& [slot, value] : slots) {
      if (prev_domain != prev.domains.end()) {
        const auto it = prev_domain->second.find(slot);
        if (it != prev_domain->second.end() && it->second == value) continue;
      }
      lev.domains[domain][slot] = value;
    }
  }
  for (const auto& [domain, slots] : prev.domains) {
    const auto curr_domain = curr.domains.find(domain);
    for (const auto& [slot, value] : slots) {
      if (curr_domain == curr.domains.end() || !curr_domain->second.contains(slot)) {
        lev.domains[domain][slot] = std::string(kNullMarker);
      }
    }
  }
  return lev;
}

DialogueState LevApply(const DialogueState& prev, const LevSpan& lev) {
  DialogueState out = prev;
  for (const auto& [domain, slots] : lev.domains) {
    for (const auto& [slot, value] : slots) {
      if (value == kNullMarker) {
        auto it = out.domains.find(domain);
        if (it == out.domains.end()) continue;
        it->second.erase(slot);
        if (it->second.empty()) out.domains.erase(it);
      } else {
        out.domains[domain][slot] = value;
      }
    }
  }
  return out;
}

double SlotF1(const LevSpan& a, const LevSpan& b, SlotMatch match) {
  using Key = std::tuple<std::string, std::string, std::string>;
  auto keys = [match](const LevSpan& s) {
    std::set<Key> out;
    for (const auto& [domain, slots] : s.domains) {
      for (const auto& [slot, value] : slots) {
        out.emplace(domain, slot, match == SlotMatch::kNameAndValue ? value : std::string());
      }
    }
    return out;
  };
  const std::set<Key> ka = keys(a);
  const std::set<Key> kb = keys(b);
  if (ka.empty() && kb.empty()) return 1.0;
  if (ka.empty() || kb.empty()) return 0.0;
  std::size_t common = 0;
  for (const Key& k : ka) common += kb.count(k);
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(kb.size());
  const double recall = static_cast<double>(common) / static_cast<double>(ka.size());
  return 2.0 * precision * recall / (precision + recall);
}

namespace {

// Replaces word-bounded occurrences of value outside of bracketed spans.
std::string ReplaceValue(const std::string& text, const std::string& value,
                         const std::string& placeholder) {
  if (value.empty() || text.size() < value.size()) return text;
  std::vector<bool> protect(text.size(), false);
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '[') continue;
    const std::size_t close = text.find(']', i);
    if (close == std::string::npos) break;
    for (std::size_t j = i; j <= close; ++j) protect[j] = true;
    i = close;
  }
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    const bool match = i + value.size() <= text.size() &&
                       text.compare(i, value.size(), value) == 0 &&
                       (i == 0 || !IsWordChar(text[i - 1])) &&
                       (i + value.size() == text.size() || !IsWordChar(text[i + value.size()])) &&
                       std::none_of(protect.begin() + static_cast<std::ptrdiff_t>(i),
                                    protect.begin() + static_cast<std::ptrdiff_t>(i + value.size()),
                                    [](bool p) { return p; });
    if (match) {
      out += placeholder;
      i += value.size();
    } else {
      out.push_back(text[i]);
      ++i;
    }
  }
  return out;
}

}  // namespace

DialogueContext Delexicalize(const DialogueContext& ctx, const DialogueState& gold_curr) {
  struct Candidate {
    std::string value;
    std::string slot;
  };
  std::vector<Candidate> candidates;
  auto collect = [&candidates](const DialogueState& s) {
    for (const auto& [domain, slots] : s.domains) {
      for (const auto& [slot, value] : slots) {
        if (value != kDelexValue) candidates.push_back({Lower(value), slot});
      }
    }
  };
  collect(ctx.prev_state);
  collect(gold_curr);
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.value.size() != b.value.size()) return a.value.size() > b.value.size();
    if (a.value != b.value) return a.value < b.value;
    return a.slot < b.slot;
  });

  DialogueContext out = ctx;
  for (auto& [domain, slots] : out.prev_state.domains) {
    for (auto& [slot, value] : slots) value = std::string(kDelexValue);
  }
  std::string last_value;
  for (const Candidate& c : candidates) {
    if (c.value == last_value) continue;  // first slot in sort order wins
    last_value = c.value;
    const std::string placeholder = "[value_" + c.slot + "]";
    out.prev_user = ReplaceValue(out.prev_user, c.value, placeholder);
    out.prev_system = ReplaceValue(out.prev_system, c.value, placeholder);
    out.curr_user = ReplaceValue(out.curr_user, c.value, placeholder);
  }
  return out;
}

}  // namespace levdex
