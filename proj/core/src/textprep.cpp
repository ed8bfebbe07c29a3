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

#include "modguard/textprep.hpp"

#include <cstddef>

namespace modguard::textprep {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_hex(char c) {
  return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}
// ECMAScript \w.
bool is_word(char c) { return is_alpha(c) || is_digit(c) || c == '_'; }

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool starts_with_ci(const std::string& s, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > s.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    if (lower(s[pos + k]) != prefix[k]) return false;
  }
  return true;
}

void blank(std::string& s, std::size_t begin, std::size_t end) {
  for (std::size_t k = begin; k < end; ++k) s[k] = ' ';
}

std::size_t run_end(const std::string& s, std::size_t pos) {
  while (pos < s.size() && !is_space(s[pos])) ++pos;
  return pos;
}

// Length of the entity starting at s[pos] == '&', or 0.
std::size_t entity_length(const std::string& s, std::size_t pos) {
  std::size_t k = pos + 1;
  if (k < s.size() && s[k] == '#') {
    ++k;
    bool hex = false;
    if (k < s.size() && (s[k] == 'x' || s[k] == 'X')) {
      hex = true;
      ++k;
    }
    const std::size_t digits_begin = k;
    while (k < s.size() && (hex ? is_hex(s[k]) : is_digit(s[k]))) ++k;
    if (k == digits_begin) return 0;
  } else {
    if (k >= s.size() || !is_alpha(s[k])) return 0;
    while (k < s.size() && (is_alpha(s[k]) || is_digit(s[k]))) ++k;
  }
  if (k >= s.size() || s[k] != ';') return 0;
  return k + 1 - pos;
}

void strip_entities(std::string& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') continue;
    if (const std::size_t n = entity_length(s, i); n > 0) {
      blank(s, i, i + n);
      i += n - 1;
    }
  }
}

void strip_urls(std::string& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool scheme = starts_with_ci(s, i, "http://") || starts_with_ci(s, i, "https://");
    const bool shortlink =
        starts_with_ci(s, i, "t.co/") && (i == 0 || !is_word(s[i - 1]));
    if (scheme || shortlink) {
      const std::size_t end = run_end(s, i);
      blank(s, i, end);
      i = end;
    }
  }
}

void strip_mentions(std::string& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '@') {
      const std::size_t end = run_end(s, i);
      blank(s, i, end);
      i = end;
    }
  }
}

void strip_hashtag_markers(std::string& s) {
  for (char& c : s) {
    if (c == '#') c = ' ';
  }
}

void strip_retweet_markers(std::string& s) {
  std::size_t i = 0;
  while (i < s.size()) {
    if (is_space(s[i])) {
      ++i;
      continue;
    }
    const std::size_t end = run_end(s, i);
    if (end - i == 2 && s[i] == 'R' && s[i + 1] == 'T') blank(s, i, end);
    i = end;
  }
}

bool boundary_after(const std::string& s, std::size_t pos) {
  return pos >= s.size() || !is_word(s[pos]);
}

// End of a timestamp match starting at pos, or 0 when none.
std::size_t timestamp_end(const std::string& s, std::size_t pos) {
  std::size_t k = pos;
  if (k + 1 < s.size() && is_digit(s[k + 1]) && k + 2 < s.size() && s[k + 2] == ':') {
    k += 2;
  } else if (k + 1 < s.size() && s[k + 1] == ':') {
    k += 1;
  } else {
    return 0;
  }
  // s[k] == ':'
  if (k + 2 >= s.size() || !is_digit(s[k + 1]) || !is_digit(s[k + 2])) return 0;
  k += 3;
  if (k + 2 < s.size() && s[k] == ':' && is_digit(s[k + 1]) && is_digit(s[k + 2]) &&
      boundary_after(s, k + 3)) {
    return k + 3;
  }
  return boundary_after(s, k) ? k : 0;
}

void strip_timestamps(std::string& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!is_digit(s[i]) || (i > 0 && is_word(s[i - 1]))) continue;
    if (const std::size_t end = timestamp_end(s, i); end != 0) {
      blank(s, i, end);
      i = end - 1;
    }
  }
}

std::string collapse_whitespace(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace

CleanText clean_text(std::string_view raw) {
  std::string s(raw);
  strip_entities(s);
  strip_urls(s);
  strip_mentions(s);
  strip_hashtag_markers(s);
  strip_retweet_markers(s);
  strip_timestamps(s);
  return CleanText(collapse_whitespace(s));
}

}  // namespace modguard::textprep
