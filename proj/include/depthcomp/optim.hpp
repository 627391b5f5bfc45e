// Copyright 2026 The depthcomp Authors. All Rights Reserved.
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

#pragma once

#include <cstdint>
#include <vector>

#include "depthcomp/autograd.hpp"

namespace depthcomp {

/// Step-halving schedule: lr(step) = lr0 * 2^-floor(step / half_every).
struct LrSchedule {
  double lr0 = 1e-4;
  std::int64_t half_every = 1000;

  double at(std::int64_t step) const;
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::int64_t t = 0;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Allocates zeroed moments matching `params`.
AdamState make_adam_state(const std::vector<Parameter*>& params, double lr);

/// One Adam update using state.lr; increments t and clears every grad.
/// A parameter without a gradient is rejected.
void adam_step(const std::vector<Parameter*>& params, AdamState& state);

}  // namespace depthcomp
