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

#include <algorithm>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "levdex/binary_io.h"
#include "levdex/corpus.h"
#include "levdex/random.h"

namespace levdex {
namespace {

struct SlotDef {
  std::string name;
  std::string question_word;
  std::vector<std::string> phrases;  // "{v}" marks the value
  std::vector<std::string> values;
  bool open = false;  // extended with invented values beyond the base list
};

struct DomainDef {
  std::string name;
  std::string noun;
  std::vector<SlotDef> slots;
};

std::vector<std::string> Times() {
  std::vector<std::string> out;
  for (int minutes = 9 * 60; minutes < 22 * 60; minutes += 15) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02d:%02d", minutes / 60, minutes % 60);
    out.emplace_back(buf);
  }
  // Interleave so short pools still spread across the day.
  std::vector<std::string> spread;
  for (std::size_t stride : {8u, 4u, 2u, 1u}) {
    for (std::size_t i = 0; i < out.size(); i += stride) {
      if (std::find(spread.begin(), spread.end(), out[i]) == spread.end()) spread.push_back(out[i]);
    }
  }
  return spread;
}

std::vector<std::string> Numbers(int lo, int hi) {
  std::vector<std::string> out;
  for (int i = lo; i <= hi; ++i) out.push_back(std::to_string(i));
  return out;
}

const std::vector<DomainDef>& Domains() {
  static const std::vector<DomainDef> kDomains = [] {
    const std::vector<std::string> areas = {"centre", "north", "south", "east", "west"};
    const std::vector<std::string> prices = {"cheap", "moderate", "expensive"};
    const std::vector<std::string> days = {"monday", "tuesday", "wednesday", "thursday",
                                           "friday", "saturday", "sunday"};
    const std::vector<std::string> restaurants = {
        "the golden curry", "pizza hut", "curry garden", "la margherita", "the nirala",
        "saigon city", "golden wok", "the copper kettle", "la tasca", "meghna", "bedouin",
        "the gandhi"};
    const std::vector<std::string> hotels = {
        "hotel santa", "acorn guest house", "the gonville", "alpha milton guest house",
        "ashley hotel", "el shaddai", "cityroomz", "finches bed and breakfast", "arbury lodge",
        "the lensfield", "avalon", "hamilton lodge"};
    const std::vector<std::string> attractions = {
        "ruskin gallery", "kings college", "the fitzwilliam museum", "byard art", "clare hall",
        "scott polar museum", "the junction", "all saints church", "jesus college", "primavera",
        "cherry hinton water play", "milton country park"};
    const std::vector<std::string> stations = {
        "cambridge", "london kings cross", "ely", "stevenage", "norwich", "peterborough",
        "leicester", "bishops stortford", "broxbourne", "birmingham new street", "kings lynn",
        "london liverpool street"};
    std::vector<std::string> places;
    for (std::size_t i = 0; i < 6; ++i) {
      places.push_back(hotels[i]);
      places.push_back(restaurants[i]);
      places.push_back(attractions[i]);
    }
    const std::vector<std::string> times = Times();

    std::vector<DomainDef> d;
    d.push_back({"restaurant", "restaurant",
                 {{"food", "food", {"serving {v} food", "that serves {v} food", "with {v} food"},
                   {"thai", "chinese", "italian", "indian", "french", "british", "korean",
                    "mexican", "spanish", "turkish", "japanese", "lebanese", "european",
                    "vietnamese", "greek", "portuguese"},
                   true},
                  {"area", "area", {"in the {v}", "in the {v} of town", "located in the {v}"},
                   areas},
                  {"pricerange", "price range", {"in the {v} price range", "that is {v}"}, prices},
                  {"name", "name", {"called {v}", "named {v}"}, restaurants, true},
                  {"people", "number of people", {"for {v} people", "for a group of {v}"},
                   Numbers(1, 8)},
                  {"day", "day", {"on {v}"}, days},
                  {"time", "time", {"at {v}", "around {v}"}, times, true}}});
    d.push_back({"hotel", "hotel",
                 {{"area", "area", {"in the {v}", "in the {v} of town", "located in the {v}"},
                   areas},
                  {"pricerange", "price range", {"in the {v} price range", "that is {v}"}, prices},
                  {"stars", "star rating", {"with {v} stars", "rated {v} stars"}, Numbers(1, 5)},
                  {"type", "type", {"that is a {v}", "of type {v}"}, {"guesthouse", "boutique"}},
                  {"parking", "parking", {"with parking {v}", "parking {v}"}, {"yes", "no"}},
                  {"name", "name", {"called {v}", "named {v}"}, hotels, true},
                  {"people", "number of people", {"for {v} people", "for a group of {v}"},
                   Numbers(1, 8)},
                  {"stay", "length of stay", {"for {v} nights", "staying {v} nights"},
                   Numbers(1, 7)},
                  {"day", "day", {"from {v}", "starting {v}"}, days}}});
    d.push_back({"attraction", "attraction",
                 {{"type", "type", {"that is a {v}", "of type {v}"},
                   {"museum", "college", "park", "theatre", "nightclub", "cinema",
                    "architecture", "boat", "swimmingpool", "entertainment"},
                   true},
                  {"area", "area", {"in the {v}", "in the {v} of town", "located in the {v}"},
                   areas},
                  {"name", "name", {"called {v}", "named {v}"}, attractions, true}}});
    d.push_back({"train", "train",
                 {{"departure", "departure station",
                   {"from {v}", "departing from {v}", "leaving from {v}"}, stations, true},
                  {"destination", "destination", {"to {v}", "going to {v}", "arriving in {v}"},
                   stations, true},
                  {"day", "day", {"on {v}"}, days},
                  {"leaveat", "departure time", {"leaving after {v}", "departing after {v}"},
                   times, true},
                  {"arriveby", "arrival time", {"arriving by {v}", "that gets there by {v}"},
                   times, true},
                  {"people", "number of tickets", {"for {v} people", "with {v} tickets"},
                   Numbers(1, 8)}}});
    d.push_back({"taxi", "taxi",
                 {{"departure", "pickup place", {"from {v}", "picking me up at {v}"}, places,
                   true},
                  {"destination", "destination", {"to {v}", "taking me to {v}"}, places, true},
                  {"leaveat", "departure time", {"leaving after {v}", "departing after {v}"},
                   times, true},
                  {"arriveby", "arrival time", {"arriving by {v}", "that gets there by {v}"},
                   times, true}}});
    d.push_back({"hospital", "hospital",
                 {{"department", "department",
                   {"with a {v} department", "for the {v} department"},
                   {"cardiology", "neurology", "paediatrics", "oncology", "haematology",
                    "urology", "gastroenterology", "acute medicine", "infectious diseases",
                    "plastic surgery", "transplant unit", "respiratory medicine"},
                   true}}});
    return d;
  }();
  return kDomains;
}

// Invented single-word value, stable for (slot, index).
std::string InventedValue(const std::string& domain, const std::string& slot, std::size_t k) {
  static const char* kSyllables[] = {"ka", "lo", "mi", "ren", "tu", "vos", "dar", "el",
                                     "sun", "bri", "go", "fen", "ral", "ti", "mon", "zu"};
  Rng rng(DeriveSeed(Fnv1a64(domain + "." + slot), k));
  std::string word;
  for (int i = 0; i < 3; ++i) word += kSyllables[rng.Below(16)];
  return word;
}

std::vector<std::string> ValuePool(const DomainDef& domain, const SlotDef& slot, int vocab_size) {
  const std::size_t n = static_cast<std::size_t>(std::max(1, vocab_size));
  std::vector<std::string> pool(slot.values.begin(),
                                slot.values.begin() + static_cast<std::ptrdiff_t>(
                                                          std::min(n, slot.values.size())));
  for (std::size_t k = 0; slot.open && pool.size() < n; ++k) {
    std::string v = InventedValue(domain.name, slot.name, k);
    if (std::find(pool.begin(), pool.end(), v) == pool.end()) pool.push_back(std::move(v));
  }
  return pool;
}

std::string Fill(const std::string& pattern, const std::string& key, const std::string& value) {
  std::string out = pattern;
  const std::size_t pos = out.find(key);
  if (pos != std::string::npos) out.replace(pos, key.size(), value);
  return out;
}

class DialogueBuilder {
 public:
  DialogueBuilder(const std::vector<const DomainDef*>& domains, int vocab_size, Rng& rng)
      : rng_(rng) {
    for (const DomainDef* d : domains) {
      Track track{d, {}, {}};
      for (std::size_t s = 0; s < d->slots.size(); ++s) {
        track.goal_order.push_back(s);
        track.pools.push_back(ValuePool(*d, d->slots[s], vocab_size));
      }
      rng_.Shuffle(track.goal_order);
      tracks_.push_back(std::move(track));
    }
  }

  Dialogue Build(const std::string& id, int n_turns, int switch_turn) {
    Dialogue dialogue;
    dialogue.id = id;
    std::size_t introduced = 0;
    for (int t = 0; t < n_turns; ++t) {
      const std::size_t active = (tracks_.size() > 1 && t >= switch_turn) ? 1 : 0;
      Track& track = tracks_[active];
      const bool intro = introduced <= active;
      if (intro) introduced = active + 1;

      Turn turn;
      const bool last = t == n_turns - 1;
      if (last && t > 0 && !intro && rng_.Bernoulli(0.08)) {
        turn.user = rng_.Pick(std::vector<std::string>{"thank you , that is all i need .",
                                                       "great , thanks for your help ."});
      } else if (intro) {
        turn.user = Inform(track, rng_.Between(1, 2), /*intro=*/true);
      } else if (pending_ && pending_->first == active) {
        turn.user = Answer(track, pending_->second);
      } else {
        const std::vector<std::size_t> filled = Filled(track);
        const bool can_add = !Unfilled(track).empty();
        const double r = rng_.Uniform();
        if (!filled.empty() && (r < 0.2 || !can_add)) {
          turn.user = Change(track, rng_.Pick(filled));
        } else if (filled.size() > 1 && r < 0.3) {
          turn.user = Delete(track, rng_.Pick(filled));
        } else {
          turn.user = Inform(track, rng_.Between(1, 2), /*intro=*/false);
        }
      }
      pending_.reset();
      turn.state = Canonicalize(state_.domains);
      if (!last) {
        const bool switching = tracks_.size() > 1 && t + 1 == switch_turn;
        turn.system = SystemResponse(active, switching);
      }
      dialogue.turns.push_back(std::move(turn));
    }
    return dialogue;
  }

 private:
  struct Track {
    const DomainDef* domain;
    std::vector<std::size_t> goal_order;
    std::vector<std::vector<std::string>> pools;
  };

  std::vector<std::size_t> Filled(const Track& track) const {
    std::vector<std::size_t> out;
    const auto it = state_.domains.find(track.domain->name);
    if (it == state_.domains.end()) return out;
    for (std::size_t s : track.goal_order) {
      if (it->second.contains(track.domain->slots[s].name)) out.push_back(s);
    }
    return out;
  }

  std::vector<std::size_t> Unfilled(const Track& track) const {
    std::vector<std::size_t> out;
    const auto it = state_.domains.find(track.domain->name);
    for (std::size_t s : track.goal_order) {
      if (it == state_.domains.end() || !it->second.contains(track.domain->slots[s].name)) {
        out.push_back(s);
      }
    }
    return out;
  }

  std::string Phrase(const Track& track, std::size_t slot, const std::string& value) {
    return Fill(rng_.Pick(track.domain->slots[slot].phrases), "{v}", value);
  }

  std::string Set(const Track& track, std::size_t slot) {
    const SlotDef& def = track.domain->slots[slot];
    const std::string& current = CurrentValue(track, slot);
    std::string value;
    do {
      value = rng_.Pick(track.pools[slot]);
    } while (value == current && track.pools[slot].size() > 1);
    state_.domains[track.domain->name][def.name] = value;
    return value;
  }

  const std::string& CurrentValue(const Track& track, std::size_t slot) const {
    static const std::string kNone;
    const auto d = state_.domains.find(track.domain->name);
    if (d == state_.domains.end()) return kNone;
    const auto s = d->second.find(track.domain->slots[slot].name);
    return s == d->second.end() ? kNone : s->second;
  }

  std::string Inform(Track& track, int count, bool intro) {
    std::vector<std::size_t> todo = Unfilled(track);
    if (todo.empty()) return Change(track, rng_.Pick(Filled(track)));
    todo.resize(std::min<std::size_t>(todo.size(), static_cast<std::size_t>(count)));
    std::string phrases;
    for (std::size_t i = 0; i < todo.size(); ++i) {
      if (i > 0) phrases += " and ";
      phrases += Phrase(track, todo[i], Set(track, todo[i]));
    }
    const std::string& noun = track.domain->noun;
    static const std::vector<std::string> kIntro = {
        "i am looking for a {n} {p} .", "i need a {n} {p} .",
        "can you help me find a {n} {p} ?", "i would also like a {n} {p} ."};
    static const std::vector<std::string> kMore = {
        "for the {n} , i would like it {p} .", "i also want the {n} {p} .",
        "the {n} should be {p} ."};
    return Fill(Fill(rng_.Pick(intro ? kIntro : kMore), "{n}", noun), "{p}", phrases);
  }

  std::string Answer(Track& track, std::size_t slot) {
    const std::string value = Set(track, slot);
    if (rng_.Bernoulli(0.6)) {
      static const std::vector<std::string> kBare = {"{v} please .", "{v} would be great .",
                                                     "i would like {v} ."};
      return Fill(rng_.Pick(kBare), "{v}", value);
    }
    return Fill(Fill("i want the {n} {p} .", "{n}", track.domain->noun), "{p}",
                Phrase(track, slot, value));
  }

  std::string Change(Track& track, std::size_t slot) {
    const std::string value = Set(track, slot);
    static const std::vector<std::string> kChange = {
        "actually , for the {n} i would rather have it {p} instead .",
        "sorry , i changed my mind , make the {n} {p} ."};
    return Fill(Fill(rng_.Pick(kChange), "{n}", track.domain->noun), "{p}",
                Phrase(track, slot, value));
  }

  std::string Delete(Track& track, std::size_t slot) {
    const SlotDef& def = track.domain->slots[slot];
    auto& slots = state_.domains[track.domain->name];
    slots.erase(def.name);
    if (slots.empty()) state_.domains.erase(track.domain->name);
    static const std::vector<std::string> kDelete = {
        "i do not care about the {w} of the {n} anymore .",
        "actually , any {w} is fine for the {n} ."};
    return Fill(Fill(rng_.Pick(kDelete), "{w}", def.question_word), "{n}", track.domain->noun);
  }

  std::string SystemResponse(std::size_t active, bool switching) {
    Track& track = tracks_[active];
    const std::string& noun = track.domain->noun;
    const std::vector<std::size_t> open = Unfilled(track);
    if (!switching && !open.empty() && rng_.Bernoulli(0.5)) {
      const std::size_t slot = open.front();
      pending_ = std::make_pair(active, slot);
      static const std::vector<std::string> kAsk = {
          "what {w} would you like for the {n} ?", "do you have a preferred {w} for the {n} ?"};
      return Fill(Fill(rng_.Pick(kAsk), "{w}", track.domain->slots[slot].question_word), "{n}",
                  noun);
    }
    const std::vector<std::size_t> filled = Filled(track);
    if (filled.empty()) return "how else can i help you ?";
    const std::size_t slot = rng_.Pick(filled);
    static const std::vector<std::string> kConfirm = {
        "i have found a {n} {p} . anything else ?",
        "there are several options {p} . can i help with anything else ?"};
    return Fill(Fill(rng_.Pick(kConfirm), "{n}", noun), "{p}",
                Phrase(track, slot, CurrentValue(track, slot)));
  }

  Rng& rng_;
  std::vector<Track> tracks_;
  DialogueState state_;
  std::optional<std::pair<std::size_t, std::size_t>> pending_;
};

}  // namespace

Corpus SynthCorpus(const SynthOptions& options) {
  const auto& all = Domains();
  const std::size_t n_domains =
      static_cast<std::size_t>(std::clamp(options.n_domains, 1, static_cast<int>(all.size())));
  Corpus corpus;
  corpus.split = options.split;
  for (int i = 0; i < std::max(1, options.n_dialogues); ++i) {
    Rng rng(DeriveSeed(options.seed, static_cast<std::uint64_t>(i)));
    const int n_turns = rng.Between(2, 6);
    std::vector<const DomainDef*> domains = {&all[rng.Below(n_domains)]};
    int switch_turn = n_turns;
    if (n_domains > 1 && n_turns >= 3 && rng.Bernoulli(0.5)) {
      const DomainDef* second;
      do {
        second = &all[rng.Below(n_domains)];
      } while (second == domains.front());
      domains.push_back(second);
      switch_turn = rng.Between(1, n_turns - 1);
    }
    DialogueBuilder builder(domains, options.vocab_size, rng);
    const std::string id = std::string(SplitName(options.split)) + "-" +
                           std::to_string(options.seed) + "-" + std::to_string(i);
    corpus.dialogues.push_back(builder.Build(id, n_turns, switch_turn));
  }
  return corpus;
}

}  // namespace levdex
