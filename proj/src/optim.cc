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

#include "levdex/optim.h"

#include <cmath>
#include <string>

#include "levdex/error.h"

namespace levdex {

OptimizerKind ParseOptimizerKind(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw Error(ErrorCode::kConfigError, "unknown optimizer '" + std::string(name) + "'");
}

const char* OptimizerName(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

Optimizer::Optimizer(OptimizerConfig config, const std::vector<ParamBlock>& blocks)
    : config_(config) {
  if (!(config_.learning_rate >= 0.0)) {
    throw Error(ErrorCode::kConfigError, "learning rate must be non-negative");
  }
  if (config_.kind == OptimizerKind::kAdam) {
    for (const ParamBlock& b : blocks) {
      m_.emplace_back(b.size, 0.0);
      v_.emplace_back(b.size, 0.0);
    }
  }
}

void Optimizer::Step(const std::vector<ParamBlock>& blocks) {
  ++t_;
  double scale = 1.0;
  if (config_.clip_norm > 0.0) {
    double sq = 0.0;
    for (const ParamBlock& b : blocks) {
      for (std::size_t i = 0; i < b.size; ++i) sq += b.grad[i] * b.grad[i];
    }
    const double norm = std::sqrt(sq);
    if (norm > config_.clip_norm) scale = config_.clip_norm / norm;
  }
  const double lr = config_.learning_rate;
  if (config_.kind == OptimizerKind::kSgd) {
    for (const ParamBlock& b : blocks) {
      for (std::size_t i = 0; i < b.size; ++i) b.value[i] -= lr * scale * b.grad[i];
    }
    return;
  }
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const ParamBlock& b = blocks[k];
    double* m = m_[k].data();
    double* v = v_[k].data();
    for (std::size_t i = 0; i < b.size; ++i) {
      const double g = scale * b.grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      b.value[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.epsilon);
    }
  }
}

}  // namespace levdex
