// Copyright 2026 The BossNet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Generator for restaurant-booking dialogs in the bAbI dialog layout.
//
// Task 1 issues an api_call after collecting cuisine, location, party size
// and price. Task 5 chains that with a slot update, rating-ordered
// proposals, phone/address requests and a closing exchange. Every dialog
// carries KB facts for the restaurants that match its final api_call,
// anchored after that call.
//
// The OOV value set shares no slot value or restaurant name with the
// default one.

#ifndef BOSSNET_BABI_SYNTH_HPP_
#define BOSSNET_BABI_SYNTH_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bossnet/common.hpp"
#include "bossnet/corpus.hpp"

namespace bossnet {

struct SlotValues {
  std::vector<std::string> cuisines, locations, numbers, prices;
};

inline SlotValues babi_slot_values(bool oov) {
  if (oov) {
    return {{"thai", "korean", "vietnamese", "japanese", "mexican"},
            {"tokyo", "seoul", "beijing", "hanoi", "lima"},
            {"three", "five", "seven", "nine"},
            {"affordable", "overpriced", "reasonable"}};
  }
  return {{"british", "french", "indian", "italian", "spanish"},
          {"bombay", "london", "madrid", "paris", "rome"},
          {"two", "four", "six", "eight"},
          {"cheap", "moderate", "expensive"}};
}

struct SynthOptions {
  int task = 1;  // 1 or 5
  std::size_t dialogs = 100;
  std::uint64_t seed = 1;
  bool oov = false;
};

namespace detail {

// Slot order: cuisine, location, number, price.
using Slots = std::array<std::string, 4>;

class BabiWriter {
 public:
  BabiWriter(const SynthOptions& opt) : opt_(opt), values_(babi_slot_values(opt.oov)), rng_(opt.seed) {}

  Corpus run() {
    Corpus c;
    c.name = opt_.task == 1 ? "synth-t1" : "synth-t5";
    for (std::size_t i = 0; i < opt_.dialogs; ++i) c.dialogs.push_back(dialog());
    return c;
  }

 private:
  template <typename V>
  const auto& pick(const V& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng_)];
  }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

  const std::vector<std::string>& slot_list(int k) const {
    switch (k) {
      case 0: return values_.cuisines;
      case 1: return values_.locations;
      case 2: return values_.numbers;
      default: return values_.prices;
    }
  }

  void say(Dialog& d, const std::string& user, const std::string& system) {
    d.turns.push_back({tokenize(user), tokenize(system)});
  }

  static std::string api_call(const Slots& s) {
    return "api_call " + s[0] + " " + s[1] + " " + s[2] + " " + s[3];
  }

  std::string request(const Slots& s, const std::array<bool, 4>& given) {
    static const std::vector<std::string> starts = {
        "can you book a table", "i'd like to book a table", "may i have a table",
        "can you make a restaurant reservation", "i would like to book a table"};
    std::string out = pick(starts);
    if (given[0]) out += " with " + s[0] + " food";
    if (given[1]) out += " in " + s[1];
    if (given[2]) out += " for " + s[2] + " people";
    if (given[3]) out += " in a " + s[3] + " price range";
    return out;
  }

  std::string answer(int slot, const std::string& v) {
    static const std::array<std::vector<std::string>, 4> forms = {{
        {"# food", "i love # food", "with # cuisine"},
        {"# please", "in #", "i'd like it in #"},
        {"for # please", "we will be #", "# people"},
        {"i am looking for a # restaurant", "in a # price range please", "# price range"},
    }};
    std::string f = pick(forms[std::size_t(slot)]);
    f.replace(f.find('#'), 1, v);
    return f;
  }

  static std::string question(int slot) {
    static const std::array<const char*, 4> q = {
        "any preference on a type of cuisine", "where should it be",
        "how many people would be in your party", "which price range are looking for"};
    return q[std::size_t(slot)];
  }

  std::string update(int slot, const std::string& v) {
    static const std::array<std::vector<std::string>, 4> forms = {{
        {"instead could it be with # cuisine", "actually i would prefer # food"},
        {"instead could it be in #", "actually i would prefer in #"},
        {"instead could it be for # people", "actually i would prefer for # people"},
        {"instead could it be in a # price range", "actually i would prefer a # price range"},
    }};
    std::string f = pick(forms[std::size_t(slot)]);
    f.replace(f.find('#'), 1, v);
    return f;
  }

  Slots random_slots() {
    Slots s;
    for (int k = 0; k < 4; ++k) s[std::size_t(k)] = pick(slot_list(k));
    return s;
  }

  struct Restaurant {
    Slots slots;
    int rating;
    std::string name;
  };

  static std::string name_of(const Slots& s, int rating) {
    return "resto_" + s[1] + "_" + s[3] + "_" + s[0] + "_" + std::to_string(rating) + "stars";
  }

  void add_facts(Dialog& d, const Restaurant& r, std::size_t anchor) {
    std::vector<Triple> facts;
    if (opt_.task == 5) facts.push_back({r.name, "r_phone", r.name + "_phone"});
    facts.push_back({r.name, "r_cuisine", r.slots[0]});
    if (opt_.task == 5) facts.push_back({r.name, "r_address", r.name + "_address"});
    facts.push_back({r.name, "r_location", r.slots[1]});
    facts.push_back({r.name, "r_number", r.slots[2]});
    facts.push_back({r.name, "r_price", r.slots[3]});
    if (opt_.task == 5) facts.push_back({r.name, "r_rating", std::to_string(r.rating)});
    for (Triple& t : facts) {
      d.kb.push_back(std::move(t));
      d.kb_anchor.push_back(anchor);
    }
  }

  /// Greeting, request, slot questions and the api_call.
  void collect(Dialog& d, const Slots& s) {
    static const std::vector<std::string> greetings = {"hi", "hello", "good morning", "hey"};
    say(d, pick(greetings), "hello what can i help you with today");
    std::array<bool, 4> given{};
    for (bool& g : given) g = coin(0.5);
    say(d, request(s, given), "i'm on it");
    std::string user = "<silence>";
    for (int k = 0; k < 4; ++k) {
      if (given[std::size_t(k)]) continue;
      say(d, user, question(k));
      user = answer(k, s[std::size_t(k)]);
    }
    say(d, user, "ok let me look into some options for you");
    say(d, "<silence>", api_call(s));
  }

  Dialog dialog() {
    Dialog d;
    Slots s = random_slots();
    collect(d, s);
    if (opt_.task == 1) {
      kb_for(d, s, d.turns.size());
      return d;
    }
    if (coin(0.5)) {
      const int k = std::uniform_int_distribution<int>(0, 3)(rng_);
      std::string v;
      do v = pick(slot_list(k));
      while (v == s[std::size_t(k)]);
      s[std::size_t(k)] = v;
      say(d, update(k, v), "sure is there anything else to update");
      say(d, "no", "ok let me look into some options for you");
      say(d, "<silence>", api_call(s));
    }
    std::vector<Restaurant> found = kb_for(d, s, d.turns.size());
    std::sort(found.begin(), found.end(),
              [](const Restaurant& a, const Restaurant& b) { return a.rating > b.rating; });
    const std::size_t accept =
        std::uniform_int_distribution<std::size_t>(0, found.size() - 1)(rng_);
    std::string user = "<silence>";
    for (std::size_t i = 0; i <= accept; ++i) {
      say(d, user, "what do you think of this option: " + found[i].name);
      if (i < accept) {
        say(d, "no this does not work for me", "sure let me find an other option for you");
        user = "<silence>";
      }
    }
    say(d, "let's do it", "great let me do the reservation");
    const Restaurant& r = found[accept];
    if (coin(0.6)) say(d, "may i have the phone number of the restaurant", "here it is " + r.name + "_phone");
    if (coin(0.6)) say(d, "can you provide the address", "here it is " + r.name + "_address");
    say(d, "you rock", "is there anything i can help you with");
    say(d, "no thanks", "you're welcome");
    return d;
  }

  /// One to three matching restaurants with distinct ratings.
  std::vector<Restaurant> kb_for(Dialog& d, const Slots& s, std::size_t anchor) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 3)(rng_);
    std::vector<int> ratings = {1, 2, 3, 4, 5, 6, 7, 8};
    std::shuffle(ratings.begin(), ratings.end(), rng_);
    std::vector<Restaurant> found;
    for (std::size_t i = 0; i < n; ++i) found.push_back({s, ratings[i], name_of(s, ratings[i])});
    for (const Restaurant& r : found) add_facts(d, r, anchor);
    return found;
  }

  SynthOptions opt_;
  SlotValues values_;
  std::mt19937_64 rng_;
};

}  // namespace detail

inline Corpus synth_babi(const SynthOptions& opt) {
  if (opt.task != 1 && opt.task != 5) throw ArgumentError("synthetic tasks are 1 and 5");
  return detail::BabiWriter(opt).run();
}

}  // namespace bossnet

#endif  // BOSSNET_BABI_SYNTH_HPP_
