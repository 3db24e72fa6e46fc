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

#ifndef LEVDEX_CORPUS_H_
#define LEVDEX_CORPUS_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "levdex/dialogue.h"

namespace levdex {

// Separator tokens of the serialized context, in layout order.
inline constexpr std::string_view kEosL1 = "<eos_l1>";
inline constexpr std::string_view kEosL2 = "<eos_l2>";
inline constexpr std::string_view kEosL3 = "<eos_l3>";
inline constexpr std::string_view kEosB = "<eos_b>";
inline constexpr std::string_view kEosU1 = "<eos_u1>";
inline constexpr std::string_view kEosR = "<eos_r>";
inline constexpr std::string_view kEosU = "<eos_u>";
inline constexpr int kMaxRetrieved = 3;

struct Dialogue {
  std::string id;
  std::vector<Turn> turns;

  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

enum class Split { kTrain, kDev, kTest };

const char* SplitName(Split split);
Split ParseSplit(std::string_view name);

struct Corpus {
  std::vector<Dialogue> dialogues;
  Split split = Split::kTrain;

  std::size_t num_turns() const;
  friend bool operator==(const Corpus&, const Corpus&) = default;
};

enum class CorpusFormat { kJsonl, kMultiwozJson };

CorpusFormat ParseCorpusFormat(std::string_view name);

// Optional per-value rewrite applied before canonicalization, e.g. a label
// normalization dictionary. Arguments are (domain, slot, value).
using ValueNormalizer =
    std::function<std::string(std::string_view, std::string_view, std::string_view)>;

// Loads and canonicalizes a corpus. Throws IO_ERROR when the file cannot be
// read and SCHEMA_ERROR naming the dialogue id and field path otherwise.
Corpus LoadCorpus(const std::string& path, CorpusFormat format, Split split = Split::kTrain,
                  const ValueNormalizer& normalizer = nullptr);

// One dialogue per line: {"id", "turns": [{"user", "system", "state"}]}.
Corpus ParseJsonlCorpus(std::istream& in, Split split = Split::kTrain,
                        const ValueNormalizer& normalizer = nullptr);
// MultiWOZ 2.0 data.json layout: {dialogue_id: {"log": [user, system, ...]}}
// where system entries carry the belief "metadata".
Corpus ParseMultiwozCorpus(std::string_view json_text, Split split = Split::kTrain,
                           const ValueNormalizer& normalizer = nullptr);

void WriteJsonlCorpus(const Corpus& corpus, std::ostream& out);
std::string CorpusToJsonl(const Corpus& corpus);

struct SynthOptions {
  std::uint64_t seed = 1;
  int n_dialogues = 100;
  int n_domains = 4;    // clamped to [1, 6]
  int vocab_size = 10;  // distinct values per open slot
  Split split = Split::kTrain;
};

// Template-generated multi-domain dialogues. Deterministic per options; the
// value inventory depends only on vocab_size so splits built from different
// seeds share it.
Corpus SynthCorpus(const SynthOptions& options);

struct ContextExample {
  DialogueContext context;
  LevSpan gold_lev;
  DialogueState gold_state;
};

// One example per turn in corpus order.
std::vector<ContextExample> EnumerateContexts(const Corpus& corpus);

struct SerializedContext {
  std::string text;

  friend bool operator==(const SerializedContext&, const SerializedContext&) = default;
};

struct ContextOptions {
  bool delex = false;
  bool include_prev_state = true;
};

// Builds "lev_1 <eos_l1> [lev_2 <eos_l2> [lev_3 <eos_l3>]] dst <eos_b> u_prev
// <eos_u1> r_prev <eos_r> u <eos_u>". With delex, values of ctx.prev_state and
// of gold_curr (when given) are delexicalized first. Throws TOO_MANY_RESULTS
// for more than three retrieved spans.
SerializedContext AssembleContext(const DialogueContext& ctx, std::span<const LevSpan> retrieved,
                                  const ContextOptions& options = {},
                                  const DialogueState* gold_curr = nullptr);

// Retrieval-side text of a turn. A query only knows the previous state; a key
// comes from labelled data, so with delex it also hides the gold values of the
// turn itself.
SerializedContext QueryText(const DialogueContext& ctx, const ContextOptions& options);
SerializedContext KeyText(const ContextExample& example, const ContextOptions& options);

// Splits an assembled context into its segments, separators excluded.
// Segments are whitespace-trimmed.
std::vector<std::string> SplitContextSegments(std::string_view text);

// True when the text contains one of the reserved separator spellings.
bool ContainsSeparator(std::string_view text);

}  // namespace levdex

#endif  // LEVDEX_CORPUS_H_
