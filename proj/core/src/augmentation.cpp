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

#include "modguard/augmentation.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "modguard/error.hpp"
#include "modguard/random.hpp"

namespace modguard::augmentation {
namespace {

constexpr std::string_view kModule = "augmentation";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Index one past the ']' matching the '[' at `open`, or npos when the text
// ends first. Brackets inside JSON strings are ignored.
std::size_t match_bracket(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '[') ++depth;
    else if (c == ']' && --depth == 0) return i + 1;
  }
  return std::string_view::npos;
}

std::optional<std::vector<std::string>> as_string_array(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) return std::nullopt;
  std::vector<std::string> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_string()) return std::nullopt;
    out.push_back(v.get<std::string>());
  }
  return out;
}

const std::unordered_map<std::string, std::vector<std::string>>& synonyms() {
  static const std::unordered_map<std::string, std::vector<std::string>> kTable = {
      {"good", {"great", "fine", "decent"}},
      {"great", {"awesome", "excellent", "good"}},
      {"bad", {"awful", "terrible", "poor"}},
      {"happy", {"glad", "cheerful", "pleased"}},
      {"sad", {"unhappy", "down", "gloomy"}},
      {"love", {"adore", "like", "enjoy"}},
      {"like", {"enjoy", "love", "dig"}},
      {"hate", {"despise", "loathe", "detest"}},
      {"stupid", {"dumb", "idiotic", "foolish"}},
      {"dumb", {"stupid", "foolish", "brainless"}},
      {"ugly", {"hideous", "unsightly", "gross"}},
      {"people", {"folks", "everyone", "persons"}},
      {"person", {"individual", "guy", "human"}},
      {"friend", {"buddy", "pal", "mate"}},
      {"friends", {"buddies", "pals", "mates"}},
      {"really", {"truly", "seriously", "very"}},
      {"very", {"really", "extremely", "so"}},
      {"think", {"believe", "reckon", "feel"}},
      {"know", {"realize", "understand", "see"}},
      {"want", {"wish", "need", "would like"}},
      {"big", {"huge", "large", "massive"}},
      {"small", {"tiny", "little", "minor"}},
      {"fast", {"quick", "rapid", "speedy"}},
      {"beautiful", {"lovely", "gorgeous", "pretty"}},
      {"nice", {"pleasant", "lovely", "kind"}},
      {"day", {"afternoon", "morning", "time"}},
      {"today", {"this day", "right now", "now"}},
      {"go", {"head", "move", "get going"}},
      {"get", {"obtain", "grab", "receive"}},
      {"make", {"create", "build", "produce"}},
      {"said", {"stated", "claimed", "mentioned"}},
      {"thing", {"stuff", "matter", "item"}},
      {"amazing", {"incredible", "fantastic", "wonderful"}},
      {"terrible", {"horrible", "awful", "dreadful"}},
      {"angry", {"mad", "furious", "upset"}},
      {"funny", {"hilarious", "amusing", "comical"}},
      {"trash", {"garbage", "rubbish", "junk"}},
      {"idiot", {"fool", "moron", "clown"}},
      {"everyone", {"everybody", "all of you", "all people"}},
      {"thanks", {"thank you", "cheers", "much appreciated"}},
  };
  return kTable;
}

constexpr std::string_view kPrefixes[] = {"honestly,", "well,",     "i mean,",   "look,",
                                          "seriously,", "frankly,", "to be fair,", "you know,"};
constexpr std::string_view kSuffixes[] = {"tbh", "for real", "if you ask me", "no doubt", "just saying"};

const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> kWords = {
      "a",     "about", "above", "after", "again", "all",   "am",    "an",    "and",   "any",
      "are",   "as",    "at",    "be",    "been",  "being", "but",   "by",    "can",   "could",
      "did",   "do",    "does",  "doing", "dont",  "for",   "from",  "get",   "got",   "had",
      "has",   "have",  "he",    "her",   "here",  "him",   "his",   "how",   "i",     "if",
      "im",    "in",    "into",  "is",    "it",    "its",   "just",  "me",    "more",  "my",
      "no",    "not",   "now",   "of",    "on",    "one",   "only",  "or",    "our",   "out",
      "so",    "some",  "than",  "that",  "the",   "their", "them",  "then",  "there", "these",
      "they",  "this",  "those", "to",    "too",   "up",    "us",    "very",  "was",   "we",
      "were",  "what",  "when",  "where", "which", "who",   "why",   "will",  "with",  "would",
      "you",   "your",  "yours", "u",     "ur",    "s",     "t",     "ll",    "re",    "ve",
  };
  return kWords;
}

std::string stub_variant(std::string_view text, std::uint64_t seed, std::size_t k) {
  Rng rng(mix_seed(mix_seed(seed, text), k));
  std::string body;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = std::min(text.find(' ', pos), text.size());
    const std::string_view word = text.substr(pos, end - pos);
    if (!body.empty()) body.push_back(' ');
    // Keep leading/trailing punctuation around the looked-up core.
    std::size_t b = 0;
    std::size_t e = word.size();
    while (b < e && !std::isalnum(static_cast<unsigned char>(word[b]))) ++b;
    while (e > b && !std::isalnum(static_cast<unsigned char>(word[e - 1]))) --e;
    const auto it = synonyms().find(lower(word.substr(b, e - b)));
    if (it != synonyms().end() && rng.uniform() < 0.5) {
      body.append(word.substr(0, b));
      body.append(it->second[rng.below(it->second.size())]);
      body.append(word.substr(e));
    } else {
      body.append(word);
    }
    pos = end + 1;
  }
  constexpr std::size_t kP = std::size(kPrefixes);
  constexpr std::size_t kS = std::size(kSuffixes);
  std::string out = std::string(kPrefixes[k % kP]) + " " + body;
  if (const std::size_t round = k / kP; round > 0) {
    out += " ";
    out += kSuffixes[(round - 1) % kS];
    if (round > kS) out += " (" + std::to_string(round / kS) + ")";
  }
  return out;
}

}  // namespace

std::string render_template(std::string_view tmpl, std::string_view text, int n) {
  std::string out;
  out.reserve(tmpl.size() + text.size());
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl.compare(i, 8, "{{text}}") == 0) {
      out.append(text);
      i += 8;
    } else if (tmpl.compare(i, 5, "{{n}}") == 0) {
      out += std::to_string(n);
      i += 5;
    } else {
      out.push_back(tmpl[i++]);
    }
  }
  return out;
}

std::vector<std::string> parse_string_array(std::string_view response) {
  std::size_t pos = 0;
  while ((pos = response.find('[', pos)) != std::string_view::npos) {
    const std::size_t end = match_bracket(response, pos);
    if (end == std::string_view::npos) {
      // An unclosed bracket that opens JSON-looking content is a truncated
      // array; anything found inside it would be a fragment.
      const auto next = response.find_first_not_of(" \t\r\n", pos + 1);
      if (next == std::string_view::npos || response[next] == '"' || response[next] == '[') break;
      ++pos;
      continue;
    }
    const auto j = nlohmann::json::parse(response.substr(pos, end - pos), nullptr, false);
    if (!j.is_discarded()) {
      if (auto strings = as_string_array(j)) return *std::move(strings);
      // Valid JSON of the wrong shape: do not look inside it.
      pos = end;
      continue;
    }
    ++pos;
  }
  throw Error(ErrorKind::kMalformedResponse, kModule, "no JSON array of strings in response");
}

RephraseResult rephrase(AugmentationClient& client, const textprep::CleanText& text, int n) {
  if (text.empty()) throw Error(ErrorKind::kInvalidInput, kModule, "cannot rephrase empty text");
  if (n < 1) throw Error(ErrorKind::kInvalidInput, kModule, "n must be at least 1");
  RephraseResult raw = client.rephrase_candidates(text, n);
  RephraseResult out;
  out.original = text;
  out.raw_response = std::move(raw.raw_response);
  std::unordered_set<std::string> seen;
  for (auto& v : raw.variants) {
    std::string t = trim(v);
    if (t.empty() || t == text.str() || textprep::clean_text(t) == text) continue;
    if (!seen.insert(t).second) continue;
    out.variants.push_back(std::move(t));
    if (out.variants.size() == static_cast<std::size_t>(n)) break;
  }
  if (out.variants.empty()) {
    throw Error(ErrorKind::kEmptyAfterFiltering, kModule, "no usable variant in response");
  }
  return out;
}

std::vector<std::string> extract_keywords(AugmentationClient& client,
                                          const textprep::CleanText& text) {
  if (text.empty()) throw Error(ErrorKind::kInvalidInput, kModule, "cannot extract keywords from empty text");
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& k : client.keyword_candidates(text)) {
    std::string t = lower(trim(k));
    if (t.empty() || !seen.insert(t).second) continue;
    out.push_back(std::move(t));
    if (out.size() == kMaxKeywords) break;
  }
  if (out.empty()) throw Error(ErrorKind::kEmptyAfterFiltering, kModule, "no usable keyword in response");
  return out;
}

RephraseResult StubClient::rephrase_candidates(const textprep::CleanText& text, int n) {
  RephraseResult r;
  r.original = text;
  for (int k = 0; k < n; ++k) r.variants.push_back(stub_variant(text.str(), seed_, static_cast<std::size_t>(k)));
  return r;
}

std::vector<std::string> StubClient::keyword_candidates(const textprep::CleanText& text) {
  struct Term {
    std::size_t count = 0;
    std::size_t first = 0;
  };
  std::unordered_map<std::string, Term> terms;
  std::vector<std::string> order;
  const std::string& s = text.str();
  std::size_t i = 0;
  std::size_t index = 0;
  while (i < s.size()) {
    while (i < s.size() && !(std::isalnum(static_cast<unsigned char>(s[i])) || (s[i] & 0x80))) ++i;
    std::size_t j = i;
    std::string word;
    while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || (s[j] & 0x80) || s[j] == '\'')) {
      if (s[j] != '\'') word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[j]))));
      ++j;
    }
    i = j;
    if (word.size() < 2 || stopwords().count(word) ||
        std::all_of(word.begin(), word.end(), [](unsigned char c) { return std::isdigit(c); })) {
      continue;
    }
    auto [it, fresh] = terms.try_emplace(word, Term{0, index++});
    if (fresh) order.push_back(word);
    ++it->second.count;
  }
  std::stable_sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
    const auto& ta = terms[a];
    const auto& tb = terms[b];
    return ta.count != tb.count ? ta.count > tb.count : ta.first < tb.first;
  });
  if (order.size() > 3) order.resize(3);
  return order;
}

corpus::Corpus balance_corpus(const corpus::Corpus& corpus, AugmentationClient& client,
                              double target_ratio, BalanceReport* report) {
  if (!(target_ratio > 0.0 && target_ratio <= 1.0)) {
    throw Error(ErrorKind::kInvalidInput, kModule, "target_ratio must lie in (0, 1]");
  }
  BalanceReport rep;
  std::size_t counts[2] = {0, 0};
  for (const auto& ex : corpus.examples()) {
    if (ex.label) ++counts[to_int(*ex.label)];
  }
  const int minority = counts[0] <= counts[1] ? 0 : 1;
  const std::size_t majority_count = counts[1 - minority];
  const auto target = static_cast<std::size_t>(
      std::ceil(target_ratio * static_cast<double>(majority_count) - 1e-9));
  if (target <= counts[minority]) {
    if (report) *report = rep;
    return corpus;
  }
  std::size_t needed = target - counts[minority];
  rep.requested = needed;

  std::vector<const corpus::LabeledExample*> originals;
  std::unordered_set<std::string> seen_text;
  std::unordered_set<std::string> ids;
  for (const auto& ex : corpus.examples()) {
    ids.insert(ex.id);
    if (ex.modality != Modality::kText) continue;
    seen_text.insert(ex.content);
    if (!ex.synthetic && ex.label && to_int(*ex.label) == minority && !ex.content.empty()) {
      originals.push_back(&ex);
    }
  }
  if (originals.empty()) {
    throw Error(ErrorKind::kInvalidInput, kModule, "minority class has no original text to rephrase");
  }

  struct State {
    std::vector<std::string> pool;
    std::size_t next = 0;
    int calls = 0;
    int serial = 0;
    bool exhausted = false;
  };
  std::vector<State> state(originals.size());
  std::vector<corpus::LabeledExample> out = corpus.examples();

  while (needed > 0) {
    std::size_t added_this_round = 0;
    for (std::size_t o = 0; o < originals.size() && needed > 0; ++o) {
      State& st = state[o];
      // Refill from the client once the cached variants are used up.
      while (st.next == st.pool.size() && !st.exhausted) {
        ++st.calls;
        const std::size_t before = st.pool.size();
        try {
          const auto r = rephrase(client, textprep::CleanText(originals[o]->content),
                                  kDefaultVariants * st.calls);
          for (const auto& v : r.variants) {
            auto c = textprep::clean_text(v);
            if (c.empty() || seen_text.count(c.str())) continue;
            if (std::find(st.pool.begin(), st.pool.end(), c.str()) != st.pool.end()) continue;
            st.pool.push_back(c.str());
          }
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::kEmptyAfterFiltering) throw;
        }
        if (st.pool.size() == before) st.exhausted = true;
      }
      // Skip cached variants that another original has produced meanwhile.
      while (st.next < st.pool.size() && seen_text.count(st.pool[st.next])) ++st.next;
      if (st.next == st.pool.size()) continue;

      corpus::LabeledExample ex;
      do {
        ex.id = originals[o]->id + "#syn" + std::to_string(++st.serial);
      } while (ids.count(ex.id));
      ids.insert(ex.id);
      ex.modality = Modality::kText;
      ex.content = st.pool[st.next++];
      ex.label = originals[o]->label;
      ex.synthetic = true;
      ex.source = originals[o]->id;
      seen_text.insert(ex.content);
      out.push_back(std::move(ex));
      --needed;
      ++added_this_round;
      ++rep.added;
    }
    if (added_this_round == 0) {
      rep.exhausted = true;
      break;
    }
  }
  if (report) *report = rep;
  return corpus::Corpus(std::move(out));
}

}  // namespace modguard::augmentation
