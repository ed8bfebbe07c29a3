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

#ifndef MODGUARD_TYPES_HPP_
#define MODGUARD_TYPES_HPP_

#include <cstdint>
#include <optional>
#include <string_view>

namespace modguard {

// Binary moderation label. The positive class is harmful.
enum class Label : std::uint8_t { kNonHarmful = 0, kHarmful = 1 };

constexpr int to_int(Label label) { return static_cast<int>(label); }

// Accepts exactly 0 or 1.
constexpr std::optional<Label> label_from_int(long long value) {
  if (value == 0) return Label::kNonHarmful;
  if (value == 1) return Label::kHarmful;
  return std::nullopt;
}

enum class Modality : std::uint8_t { kText, kImage };

std::string_view modality_name(Modality modality);
std::optional<Modality> modality_from_name(std::string_view name);

}  // namespace modguard

#endif  // MODGUARD_TYPES_HPP_
