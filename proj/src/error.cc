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

#include "levdex/error.h"

namespace levdex {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kReservedValue: return "RESERVED_VALUE";
    case ErrorCode::kParseError: return "PARSE_ERROR";
    case ErrorCode::kIoError: return "IO_ERROR";
    case ErrorCode::kSchemaError: return "SCHEMA_ERROR";
    case ErrorCode::kTooManyResults: return "TOO_MANY_RESULTS";
    case ErrorCode::kDuplicateDoc: return "DUPLICATE_DOC";
    case ErrorCode::kInsufficientCandidates: return "INSUFFICIENT_CANDIDATES";
    case ErrorCode::kDimMismatch: return "DIM_MISMATCH";
    case ErrorCode::kNonFinite: return "NONFINITE";
    case ErrorCode::kEmptyIndex: return "EMPTY_INDEX";
    case ErrorCode::kVersionMismatch: return "VERSION_MISMATCH";
    case ErrorCode::kFingerprintMismatch: return "FINGERPRINT_MISMATCH";
    case ErrorCode::kMissingGold: return "MISSING_GOLD";
    case ErrorCode::kMissingParams: return "MISSING_PARAMS";
    case ErrorCode::kEmptyEval: return "EMPTY_EVAL";
    case ErrorCode::kConfigError: return "CONFIG_ERROR";
    case ErrorCode::kUsage: return "USAGE";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
  }
  return "UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> offset)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code),
      offset_(offset) {}

}  // namespace levdex
