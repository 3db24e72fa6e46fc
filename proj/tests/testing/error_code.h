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

#ifndef LEVDEX_TESTS_TESTING_ERROR_CODE_H_
#define LEVDEX_TESTS_TESTING_ERROR_CODE_H_

#include <functional>

#include <gtest/gtest.h>

#include "levdex/error.h"

namespace levdex::testing {

// Code of the levdex::Error raised by `fn`; records a failure if none is.
inline ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kUsage;
}

}  // namespace levdex::testing

#endif  // LEVDEX_TESTS_TESTING_ERROR_CODE_H_
