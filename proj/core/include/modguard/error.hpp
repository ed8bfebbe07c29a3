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

#ifndef MODGUARD_ERROR_HPP_
#define MODGUARD_ERROR_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace modguard {

enum class ErrorKind {
  kInvalidInput,
  kIoError,
  kFormatError,
  kBackendFailure,
  kImageDecodeError,
  kZeroVector,
  kDimMismatch,
  kDegenerateData,
  kEvenK,
  kUnsupportedKind,
  kLengthMismatch,
  kSingleClass,
  kDegenerateInput,
  kTooFewPoints,
  kEndpointUnreachable,
  kMalformedResponse,
  kEmptyAfterFiltering,
  kQuotaExceeded,
  kSchemaError,
  kDuplicateId,
  kTooFewExamples,
};

std::string_view error_kind_name(ErrorKind kind);

// All library failures are reported as modguard::Error. what() is prefixed
// with the originating module, e.g. "classifiers: DimMismatch: ...".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string_view module, std::string_view message,
        std::optional<std::size_t> item_index = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }
  const std::string& message() const noexcept { return message_; }
  // Index of the failing item for batch operations, when known.
  std::optional<std::size_t> item_index() const noexcept { return item_index_; }

 private:
  ErrorKind kind_;
  std::string module_;
  std::string message_;
  std::optional<std::size_t> item_index_;
};

}  // namespace modguard

#endif  // MODGUARD_ERROR_HPP_
