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

#include "modguard/types.hpp"

namespace modguard {

std::string_view modality_name(Modality modality) {
  return modality == Modality::kText ? "text" : "image";
}

std::optional<Modality> modality_from_name(std::string_view name) {
  if (name == "text") return Modality::kText;
  if (name == "image") return Modality::kImage;
  return std::nullopt;
}

}  // namespace modguard
