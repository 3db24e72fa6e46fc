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

#ifndef LEVDEX_ERROR_H_
#define LEVDEX_ERROR_H_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace levdex {

enum class ErrorCode {
  kReservedValue,
  kParseError,
  kIoError,
  kSchemaError,
  kTooManyResults,
  kDuplicateDoc,
  kInsufficientCandidates,
  kDimMismatch,
  kNonFinite,
  kEmptyIndex,
  kVersionMismatch,
  kFingerprintMismatch,
  kMissingGold,
  kMissingParams,
  kEmptyEval,
  kConfigError,
  kUsage,
  kInvalidArgument,
};

// Stable upper-case name, e.g. "RESERVED_VALUE".
const char* ErrorCodeName(ErrorCode code);

// All recoverable failures in the library are reported with this exception.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> offset = std::nullopt);

  ErrorCode code() const { return code_; }

  // Byte offset into the input for parse failures.
  std::optional<std::size_t> offset() const { return offset_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> offset_;
};

}  // namespace levdex

#endif  // LEVDEX_ERROR_H_
