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

#ifndef MODGUARD_TEXTPREP_HPP_
#define MODGUARD_TEXTPREP_HPP_

#include <string>
#include <string_view>
#include <utility>

namespace modguard::textprep {

// Text that has been through clean_text(). Construction from a raw string is
// explicit so already-cleaned corpora can be reloaded without re-cleaning.
class CleanText {
 public:
  CleanText() = default;
  explicit CleanText(std::string content) : content_(std::move(content)) {}

  const std::string& str() const noexcept { return content_; }
  bool empty() const noexcept { return content_.empty(); }

  friend bool operator==(const CleanText&, const CleanText&) = default;

 private:
  std::string content_;
};

// Rule-based cleanup of social-media text. Rules run in a fixed order and each
// removal is replaced by a space so no rule can splice new matches together:
//   1. HTML entities (&amp; &#39; &#x27;)
//   2. URLs: http:// and https:// anywhere, bare t.co/ shortlinks at a word start
//   3. @mentions: '@' and the rest of its whitespace-delimited run
//   4. hashtag markers: '#' (the tag word is kept)
//   5. retweet markers: standalone "RT" tokens
//   6. timestamps matching \b\d{1,2}:\d{2}(:\d{2})?\b
//   7. whitespace runs collapsed, ends trimmed
// Total, deterministic and idempotent. Input is expected to be UTF-8; only
// ASCII bytes are ever matched so multi-byte sequences pass through intact.
CleanText clean_text(std::string_view raw);

}  // namespace modguard::textprep

#endif  // MODGUARD_TEXTPREP_HPP_
