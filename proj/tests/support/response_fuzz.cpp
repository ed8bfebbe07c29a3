/* Copyright 2026 The modguard Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "response_fuzz.hpp"

#include <json.hpp>

#include "modguard/random.hpp"

namespace modguard::testing {
namespace {

constexpr std::string_view kWords[] = {"you",  "are",   "so",   "kind",  "what", "a",
                                       "day",  "idiots", "go",  "away",  "lol",  "never",
                                       "café", "ok",    "🙂",   "again", "tbh",  "really"};
constexpr std::string_view kOdd[] = {"\"", "\\", "[", "]", "{", "}", "\n", "\t", ",", "```"};

// Prose that never contains a usable array.
constexpr std::string_view kPrefixes[] = {
    "",
    "Sure! Here are the rephrased comments:\n",
    "```json\n",
    "Here you go (as requested): ",
    "Note [1]: the output follows.\n",
    "[draft] ",
    "{\"count\": 3} ",
    "[1, 2, 3] then ",
    "[[\"nested\"]] ",
    "[] ",
    "[\"a\", 7] ",
};
constexpr std::string_view kSuffixes[] = {"", "\n```", " Let me know if you need more.", " [end]",
                                          "\n\nHope this helps!"};
constexpr std::string_view kProse[] = {
    "I'm sorry, I can't help with that request.",
    "Here are ten ways to say it: one, two, three.",
    "```\nno json here\n```",
    "{\"variants\": \"none\"}",
    "(see list above)",
};

std::string random_string(Rng& rng) {
  std::string s;
  const std::size_t words = 1 + rng.below(6);
  for (std::size_t w = 0; w < words; ++w) {
    if (w) s.push_back(' ');
    if (rng.uniform() < 0.15) s += kOdd[rng.below(std::size(kOdd))];
    else s += kWords[rng.below(std::size(kWords))];
  }
  return s;
}

std::vector<std::string> random_array(Rng& rng) {
  std::vector<std::string> v(1 + rng.below(10));
  for (auto& s : v) s = random_string(rng);
  return v;
}

template <std::size_t N>
std::string_view pick(Rng& rng, const std::string_view (&items)[N]) {
  return items[rng.below(N)];
}

}  // namespace

std::vector<ResponseCase> make_response_fuzz(std::uint64_t seed, std::size_t count) {
  Rng rng(seed);
  std::vector<ResponseCase> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    ResponseCase c;
    switch (i % 6) {
      case 0: {  // a valid array behind prose and distractors
        auto arr = random_array(rng);
        const nlohmann::json j = arr;
        c.category = "wrapped";
        c.response = std::string(pick(rng, kPrefixes)) + j.dump(rng.below(2) ? 2 : -1) +
                     std::string(pick(rng, kSuffixes));
        c.expected = std::move(arr);
        break;
      }
      case 1: {  // the response was cut off mid-array
        const nlohmann::json j = random_array(rng);
        const std::string full = j.dump(rng.below(2) ? 2 : -1);
        c.category = "truncated";
        c.response = std::string(pick(rng, kPrefixes)) + full.substr(0, 1 + rng.below(full.size() - 1));
        break;
      }
      case 2:
        c.category = "prose";
        c.response = std::string(pick(rng, kProse));
        break;
      case 3: {  // only arrays of the wrong shape
        static constexpr std::string_view kWrong[] = {"[]", "[1, 2]", "[[\"a\", \"b\"]]",
                                                      "[\"a\", null]", "[{\"text\": \"a\"}]",
                                                      "[true]"};
        c.category = "wrong-shape";
        c.response = std::string(pick(rng, kPrefixes)) + std::string(pick(rng, kWrong)) +
                     std::string(pick(rng, kSuffixes));
        break;
      }
      case 4: {  // wrong shape first, then a good one
        auto arr = random_array(rng);
        const nlohmann::json j = arr;
        c.category = "second-array";
        c.response = "[\"x\", 1]\n" + j.dump() + "\n[\"later\"]";
        c.expected = std::move(arr);
        break;
      }
      default: {  // random bytes biased towards JSON punctuation
        static constexpr char kAlphabet[] = "[]{}\",:\\ abc01\n";
        const std::size_t len = rng.below(80);
        c.category = "bytes";
        for (std::size_t k = 0; k < len; ++k) {
          c.response.push_back(rng.uniform() < 0.9 ? kAlphabet[rng.below(sizeof(kAlphabet) - 1)]
                                                   : static_cast<char>(rng.below(256)));
        }
        c.known = false;
        break;
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

bool occurs_as_array(std::string_view response, const std::vector<std::string>& got) {
  for (std::size_t i = 0; i < response.size(); ++i) {
    if (response[i] != '[') continue;
    for (std::size_t j = i + 1; j < response.size(); ++j) {
      if (response[j] != ']') continue;
      const auto parsed = nlohmann::json::parse(response.substr(i, j - i + 1), nullptr, false);
      if (!parsed.is_discarded() && parsed.is_array() && parsed == nlohmann::json(got)) return true;
    }
  }
  return false;
}

}  // namespace modguard::testing
