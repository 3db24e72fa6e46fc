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

#ifndef LEVDEX_TOOLS_CLI_H_
#define LEVDEX_TOOLS_CLI_H_

#include <string>
#include <vector>

#include "levdex/error.h"

namespace levdex::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitIo = 4;
inline constexpr int kExitNonFinite = 5;

int ExitCodeFor(ErrorCode code);

// Runs one invocation; args excludes the program name. Errors are reported
// on stderr and turned into exit codes.
int Run(const std::vector<std::string>& args);

}  // namespace levdex::cli

#endif  // LEVDEX_TOOLS_CLI_H_
