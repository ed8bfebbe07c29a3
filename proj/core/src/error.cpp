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

#include "modguard/error.hpp"

namespace modguard {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "InvalidInput";
    case ErrorKind::kIoError: return "IoError";
    case ErrorKind::kFormatError: return "FormatError";
    case ErrorKind::kBackendFailure: return "BackendFailure";
    case ErrorKind::kImageDecodeError: return "ImageDecodeError";
    case ErrorKind::kZeroVector: return "ZeroVector";
    case ErrorKind::kDimMismatch: return "DimMismatch";
    case ErrorKind::kDegenerateData: return "DegenerateData";
    case ErrorKind::kEvenK: return "EvenK";
    case ErrorKind::kUnsupportedKind: return "UnsupportedKind";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kSingleClass: return "SingleClass";
    case ErrorKind::kDegenerateInput: return "DegenerateInput";
    case ErrorKind::kTooFewPoints: return "TooFewPoints";
    case ErrorKind::kEndpointUnreachable: return "EndpointUnreachable";
    case ErrorKind::kMalformedResponse: return "MalformedResponse";
    case ErrorKind::kEmptyAfterFiltering: return "EmptyAfterFiltering";
    case ErrorKind::kQuotaExceeded: return "QuotaExceeded";
    case ErrorKind::kSchemaError: return "SchemaError";
    case ErrorKind::kDuplicateId: return "DuplicateId";
    case ErrorKind::kTooFewExamples: return "TooFewExamples";
  }
  return "Unknown";
}

namespace {

std::string format_what(ErrorKind kind, std::string_view module,
                        std::string_view message,
                        std::optional<std::size_t> item_index) {
  std::string out;
  out.append(module).append(": ").append(error_kind_name(kind));
  if (item_index) out.append(" (item ").append(std::to_string(*item_index)).append(")");
  if (!message.empty()) out.append(": ").append(message);
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, std::string_view module, std::string_view message,
             std::optional<std::size_t> item_index)
    : std::runtime_error(format_what(kind, module, message, item_index)),
      kind_(kind),
      module_(module),
      message_(message),
      item_index_(item_index) {}

}  // namespace modguard
