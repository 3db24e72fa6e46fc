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

#ifndef LEVDEX_TOKENIZER_H_
#define LEVDEX_TOKENIZER_H_

#include <string>
#include <string_view>
#include <vector>

namespace levdex {

// Retrieval tokenizer shared by BM25 and the dual encoder. Lowercases and
// splits on non-alphanumeric runs, except that "<eos_*>" separators,
// bracketed tokens such as "[hotel]" or "[value_food]", and the deletion
// marker NULL are kept whole.
std::vector<std::string> Tokenize(std::string_view text);

}  // namespace levdex

#endif  // LEVDEX_TOKENIZER_H_
