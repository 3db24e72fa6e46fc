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

#include "levdex/corpus.h"

#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "levdex/binary_io.h"
#include "levdex/error.h"

namespace levdex {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void SchemaError(const std::string& dialogue_id, const std::string& path,
                              const std::string& what) {
  throw Error(ErrorCode::kSchemaError, "dialogue '" + dialogue_id + "' " + path + ": " + what);
}

std::string CheckedUtterance(const std::string& dialogue_id, const std::string& path,
                             const std::string& raw) {
  if (ContainsSeparator(raw)) SchemaError(dialogue_id, path, "contains a reserved separator token");
  return NormalizeText(raw);
}

template <typename Json>
DialogueState StateFromJson(const std::string& dialogue_id, const std::string& path,
                            const Json& node, const ValueNormalizer& normalizer) {
  if (!node.is_object()) SchemaError(dialogue_id, path, "expected an object");
  SlotMap raw;
  for (const auto& [domain, slots] : node.items()) {
    if (!slots.is_object()) SchemaError(dialogue_id, path + "." + domain, "expected an object");
    for (const auto& [slot, value] : slots.items()) {
      if (!value.is_string()) {
        SchemaError(dialogue_id, path + "." + domain + "." + slot, "expected a string");
      }
      std::string v = value.template get<std::string>();
      if (normalizer) v = normalizer(domain, slot, v);
      raw[domain][slot] = std::move(v);
    }
  }
  try {
    return Canonicalize(raw);
  } catch (const Error& e) {
    SchemaError(dialogue_id, path, e.what());
  }
}

// Collapses whitespace runs without changing case.
std::string Squash(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string word;
  std::string out;
  while (in >> word) {
    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  return out;
}

void CheckCorpus(const Corpus& corpus) {
  std::set<std::string> seen;
  for (const Dialogue& d : corpus.dialogues) {
    if (!seen.insert(d.id).second) SchemaError(d.id, "id", "duplicate dialogue id");
    if (d.turns.empty()) SchemaError(d.id, "turns", "dialogue has no turns");
  }
}

}  // namespace

const char* SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "train";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  throw Error(ErrorCode::kConfigError, "unknown split '" + std::string(name) + "'");
}

std::size_t Corpus::num_turns() const {
  std::size_t n = 0;
  for (const Dialogue& d : dialogues) n += d.turns.size();
  return n;
}

CorpusFormat ParseCorpusFormat(std::string_view name) {
  if (name == "jsonl") return CorpusFormat::kJsonl;
  if (name == "multiwoz-json") return CorpusFormat::kMultiwozJson;
  throw Error(ErrorCode::kConfigError, "unknown corpus format '" + std::string(name) + "'");
}

Corpus LoadCorpus(const std::string& path, CorpusFormat format, Split split,
                  const ValueNormalizer& normalizer) {
  if (format == CorpusFormat::kMultiwozJson) {
    return ParseMultiwozCorpus(ReadFileToString(path), split, normalizer);
  }
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return ParseJsonlCorpus(in, split, normalizer);
}

Corpus ParseJsonlCorpus(std::istream& in, Split split, const ValueNormalizer& normalizer) {
  Corpus corpus;
  corpus.split = split;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (NormalizeText(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    json node;
    try {
      node = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kSchemaError, where + ": " + e.what());
    }
    if (!node.is_object() || !node.contains("id") || !node["id"].is_string()) {
      throw Error(ErrorCode::kSchemaError, where + ": missing string field 'id'");
    }
    Dialogue dialogue;
    dialogue.id = node["id"].get<std::string>();
    if (!node.contains("turns") || !node["turns"].is_array()) {
      SchemaError(dialogue.id, "turns", "missing array");
    }
    const json& turns = node["turns"];
    for (std::size_t i = 0; i < turns.size(); ++i) {
      const std::string path = "turns[" + std::to_string(i) + "]";
      const json& t = turns[i];
      if (!t.is_object()) SchemaError(dialogue.id, path, "expected an object");
      if (!t.contains("user") || !t["user"].is_string()) {
        SchemaError(dialogue.id, path + ".user", "missing string field");
      }
      Turn turn;
      turn.user = CheckedUtterance(dialogue.id, path + ".user", t["user"].get<std::string>());
      if (t.contains("system")) {
        if (!t["system"].is_string()) SchemaError(dialogue.id, path + ".system", "expected a string");
        turn.system =
            CheckedUtterance(dialogue.id, path + ".system", t["system"].get<std::string>());
      }
      if (!t.contains("state")) SchemaError(dialogue.id, path + ".state", "missing object field");
      turn.state = StateFromJson(dialogue.id, path + ".state", t["state"], normalizer);
      dialogue.turns.push_back(std::move(turn));
    }
    corpus.dialogues.push_back(std::move(dialogue));
  }
  CheckCorpus(corpus);
  return corpus;
}

Corpus ParseMultiwozCorpus(std::string_view json_text, Split split,
                           const ValueNormalizer& normalizer) {
  ordered_json root;
  try {
    root = ordered_json::parse(json_text);
  } catch (const ordered_json::parse_error& e) {
    throw Error(ErrorCode::kSchemaError, std::string("data.json: ") + e.what());
  }
  if (!root.is_object()) throw Error(ErrorCode::kSchemaError, "data.json: expected an object");
  Corpus corpus;
  corpus.split = split;
  for (const auto& [id, dialogue_node] : root.items()) {
    Dialogue dialogue;
    dialogue.id = id;
    if (!dialogue_node.is_object() || !dialogue_node.contains("log") ||
        !dialogue_node["log"].is_array()) {
      SchemaError(id, "log", "missing array");
    }
    const ordered_json& log = dialogue_node["log"];
    for (std::size_t i = 0; i < log.size(); i += 2) {
      const std::string user_path = "log[" + std::to_string(i) + "]";
      if (!log[i].is_object() || !log[i].contains("text") || !log[i]["text"].is_string()) {
        SchemaError(id, user_path + ".text", "missing string field");
      }
      Turn turn;
      turn.user = CheckedUtterance(id, user_path + ".text", log[i]["text"].get<std::string>());
      if (i + 1 < log.size()) {
        const std::string sys_path = "log[" + std::to_string(i + 1) + "]";
        const ordered_json& sys = log[i + 1];
        if (!sys.is_object() || !sys.contains("text") || !sys["text"].is_string()) {
          SchemaError(id, sys_path + ".text", "missing string field");
        }
        turn.system = CheckedUtterance(id, sys_path + ".text", sys["text"].get<std::string>());
        // Flatten metadata.<domain>.{book,semi}.<slot> into <domain>.<slot>.
        json flat = json::object();
        if (sys.contains("metadata") && sys["metadata"].is_object()) {
          for (const auto& [domain, parts] : sys["metadata"].items()) {
            if (!parts.is_object()) continue;
            for (const char* part : {"semi", "book"}) {
              if (!parts.contains(part) || !parts[part].is_object()) continue;
              for (const auto& [slot, value] : parts[part].items()) {
                if (!value.is_string()) continue;  // e.g. "booked" lists
                const std::string v = NormalizeText(value.get<std::string>());
                if (v.empty() || v == "not mentioned" || v == "none") continue;
                std::string cleaned = value.get<std::string>();
                for (char& c : cleaned) {
                  if (c == ',' || c == '[' || c == ']') c = ' ';
                }
                std::string name = NormalizeText(slot);
                for (char& c : name) {
                  if (c == ' ') c = '_';
                }
                flat[NormalizeText(domain)][name] = cleaned;
              }
            }
          }
        }
        turn.state = StateFromJson(id, sys_path + ".metadata", flat, normalizer);
      } else if (!dialogue.turns.empty()) {
        turn.state = dialogue.turns.back().state;
      }
      dialogue.turns.push_back(std::move(turn));
    }
    corpus.dialogues.push_back(std::move(dialogue));
  }
  CheckCorpus(corpus);
  return corpus;
}

void WriteJsonlCorpus(const Corpus& corpus, std::ostream& out) {
  for (const Dialogue& d : corpus.dialogues) {
    json node;
    node["id"] = d.id;
    node["turns"] = json::array();
    for (const Turn& t : d.turns) {
      json state = json::object();
      for (const auto& [domain, slots] : t.state.domains) {
        for (const auto& [slot, value] : slots) state[domain][slot] = value;
      }
      node["turns"].push_back({{"user", t.user}, {"system", t.system}, {"state", state}});
    }
    out << node.dump() << '\n';
  }
}

std::string CorpusToJsonl(const Corpus& corpus) {
  std::ostringstream out;
  WriteJsonlCorpus(corpus, out);
  return out.str();
}

std::vector<ContextExample> EnumerateContexts(const Corpus& corpus) {
  std::vector<ContextExample> out;
  out.reserve(corpus.num_turns());
  for (const Dialogue& d : corpus.dialogues) {
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      ContextExample ex;
      ex.context.dialogue_id = d.id;
      ex.context.turn_index = static_cast<int>(t);
      ex.context.curr_user = d.turns[t].user;
      if (t > 0) {
        ex.context.prev_state = d.turns[t - 1].state;
        ex.context.prev_user = d.turns[t - 1].user;
        ex.context.prev_system = d.turns[t - 1].system;
      }
      ex.gold_state = d.turns[t].state;
      ex.gold_lev = LevDiff(ex.context.prev_state, ex.gold_state);
      out.push_back(std::move(ex));
    }
  }
  return out;
}

SerializedContext AssembleContext(const DialogueContext& ctx, std::span<const LevSpan> retrieved,
                                  const ContextOptions& options,
                                  const DialogueState* gold_curr) {
  if (retrieved.size() > static_cast<std::size_t>(kMaxRetrieved)) {
    throw Error(ErrorCode::kTooManyResults,
                std::to_string(retrieved.size()) + " retrieved spans, at most 3 allowed");
  }
  const DialogueContext view =
      options.delex ? Delexicalize(ctx, gold_curr ? *gold_curr : DialogueState{}) : ctx;
  static constexpr std::string_view kLevSeparators[] = {kEosL1, kEosL2, kEosL3};

  std::string text;
  auto append = [&text](std::string_view piece) {
    if (piece.empty()) return;
    if (!text.empty()) text.push_back(' ');
    text.append(piece);
  };
  for (std::size_t i = 0; i < retrieved.size(); ++i) {
    append(SerializeState(retrieved[i]));
    append(kLevSeparators[i]);
  }
  if (options.include_prev_state) append(SerializeState(view.prev_state));
  append(kEosB);
  append(view.prev_user);
  append(kEosU1);
  append(view.prev_system);
  append(kEosR);
  append(view.curr_user);
  append(kEosU);
  return SerializedContext{std::move(text)};
}

SerializedContext QueryText(const DialogueContext& ctx, const ContextOptions& options) {
  return AssembleContext(ctx, {}, options);
}

SerializedContext KeyText(const ContextExample& example, const ContextOptions& options) {
  return AssembleContext(example.context, {}, options, &example.gold_state);
}

std::vector<std::string> SplitContextSegments(std::string_view text) {
  static constexpr std::string_view kAll[] = {kEosL1, kEosL2, kEosL3, kEosB,
                                              kEosU1, kEosR,  kEosU};
  std::vector<std::string> out;
  std::size_t begin = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    bool matched = false;
    for (std::string_view sep : kAll) {
      if (text.substr(pos, sep.size()) == sep) {
        out.push_back(Squash(text.substr(begin, pos - begin)));
        pos += sep.size();
        begin = pos;
        matched = true;
        break;
      }
    }
    if (!matched) ++pos;
  }
  const std::string tail = Squash(text.substr(begin));
  if (!tail.empty()) out.push_back(tail);
  return out;
}

bool ContainsSeparator(std::string_view text) {
  return text.find("<eos_") != std::string_view::npos;
}

}  // namespace levdex
