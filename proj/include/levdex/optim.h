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

#ifndef LEVDEX_OPTIM_H_
#define LEVDEX_OPTIM_H_

#include <cstddef>
#include <string_view>
#include <vector>

namespace levdex {

enum class OptimizerKind { kSgd, kAdam };

OptimizerKind ParseOptimizerKind(std::string_view name);
const char* OptimizerName(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kSgd;
  double learning_rate = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 0.0;  // global gradient norm cap, 0 disables
};

// A flat parameter block and its gradient, both owned elsewhere.
struct ParamBlock {
  double* value = nullptr;
  const double* grad = nullptr;
  std::size_t size = 0;
};

// Plain SGD or Adam over a fixed list of blocks. The block layout passed to
// Step must match the one given at construction.
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, const std::vector<ParamBlock>& blocks);

  void Step(const std::vector<ParamBlock>& blocks);
  long steps() const { return t_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

 private:
  OptimizerConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  long t_ = 0;
};

}  // namespace levdex

#endif  // LEVDEX_OPTIM_H_
