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

#ifndef LEVDEX_TESTS_TESTING_BM25_REFERENCE_H_
#define LEVDEX_TESTS_TESTING_BM25_REFERENCE_H_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "levdex/bm25.h"

namespace levdex::testing {

// Scores one document directly from token lists, no postings involved.
inline double ReferenceBm25(const std::vector<std::vector<std::string>>& docs, std::size_t d,
                            const std::vector<std::string>& query, Bm25Params p = {}) {
  const double n = static_cast<double>(docs.size());
  double avgdl = 0.0;
  for (const auto& doc : docs) avgdl += static_cast<double>(doc.size());
  avgdl /= n;
  double score = 0.0;
  for (const std::string& q : query) {
    double df = 0.0;
    for (const auto& doc : docs) df += std::find(doc.begin(), doc.end(), q) != doc.end() ? 1.0 : 0.0;
    const double tf = static_cast<double>(std::count(docs[d].begin(), docs[d].end(), q));
    if (tf == 0.0) continue;
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    const double len = static_cast<double>(docs[d].size());
    score += idf * tf * (p.k1 + 1.0) / (tf + p.k1 * (1.0 - p.b + p.b * len / avgdl));
  }
  return score;
}

// Document positions ranked the way TopK ranks them: positive scores only,
// descending score, ascending position on ties.
inline std::vector<std::size_t> ReferenceRanking(const std::vector<std::vector<std::string>>& docs,
                                                 const std::vector<std::string>& query,
                                                 Bm25Params p = {}) {
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const double s = ReferenceBm25(docs, d, query, p);
    if (s > 0.0) scored.push_back({-s, d});
  }
  std::sort(scored.begin(), scored.end());
  std::vector<std::size_t> out;
  for (const auto& [s, d] : scored) out.push_back(d);
  return out;
}

}  // namespace levdex::testing

#endif  // LEVDEX_TESTS_TESTING_BM25_REFERENCE_H_
