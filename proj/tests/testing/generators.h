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

#ifndef LEVDEX_TESTS_TESTING_GENERATORS_H_
#define LEVDEX_TESTS_TESTING_GENERATORS_H_

#include <string>
#include <vector>

#include "levdex/dialogue.h"
#include "levdex/random.h"

namespace levdex::testing {

// Random canonical states over a small vocabulary so that generated pairs
// overlap often. Values can span several words.
inline DialogueState RandomState(Rng& rng, int max_domains = 3, int max_slots = 4) {
  static const std::vector<std::string> kDomains = {"hotel", "restaurant", "taxi", "train",
                                                    "attraction"};
  static const std::vector<std::string> kSlots = {"area", "food", "price", "stars", "day",
                                                  "people", "departure", "name"};
  static const std::vector<std::string> kValues = {
      "centre", "thai", "cheap", "4", "sunday", "2", "hotel santa", "the golden curry",
      "north", "london kings cross", "10:15", "don't care", "st. john's"};
  DialogueState s;
  const int n_domains = rng.Between(0, max_domains);
  for (int d = 0; d < n_domains; ++d) {
    const std::string& domain = rng.Pick(kDomains);
    const int n_slots = rng.Between(1, max_slots);
    for (int i = 0; i < n_slots; ++i) s.domains[domain][rng.Pick(kSlots)] = rng.Pick(kValues);
  }
  return s;
}

// Perturbs a state: changes, deletes and adds a few slots.
inline DialogueState Mutate(Rng& rng, const DialogueState& base) {
  DialogueState out = base;
  const DialogueState extra = RandomState(rng, 2, 2);
  for (const auto& [domain, slots] : extra.domains) {
    for (const auto& [slot, value] : slots) out.domains[domain][slot] = value;
  }
  for (auto it = out.domains.begin(); it != out.domains.end();) {
    for (auto s = it->second.begin(); s != it->second.end();) {
      s = rng.Bernoulli(0.25) ? it->second.erase(s) : std::next(s);
    }
    it = it->second.empty() ? out.domains.erase(it) : std::next(it);
  }
  return out;
}

}  // namespace levdex::testing

#endif  // LEVDEX_TESTS_TESTING_GENERATORS_H_
