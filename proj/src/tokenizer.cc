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

#include "levdex/tokenizer.h"

#include <cctype>

namespace levdex {
namespace {

bool IsAlnum(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0 || u >= 0x80;
}

// Length of an atomic "[...]" or "<eos_...>" token starting at pos, or 0.
std::size_t AtomicLength(std::string_view text, std::size_t pos) {
  const char open = text[pos];
  const char close = open == '[' ? ']' : '>';
  if (open == '<' && text.substr(pos, 5) != "<eos_") return 0;
  if (open != '[' && open != '<') return 0;
  for (std::size_t i = pos + 1; i < text.size(); ++i) {
    const char c = text[i];
    if (c == close) return i > pos + 1 ? i - pos + 1 : 0;
    if (std::isspace(static_cast<unsigned char>(c)) || c == '[' || c == '<' || c == ',') return 0;
  }
  return 0;
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (const std::size_t n = AtomicLength(text, i); n > 0) {
      std::string token(text.substr(i, n));
      for (char& c : token) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      tokens.push_back(std::move(token));
      i += n;
      continue;
    }
    if (!IsAlnum(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && IsAlnum(text[j])) ++j;
    std::string token(text.substr(i, j - i));
    if (token != "NULL") {
      for (char& c : token) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    tokens.push_back(std::move(token));
    i = j;
  }
  return tokens;
}

}  // namespace levdex
