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

#include <functional>
#include <vector>

#include "depthcomp/autograd.hpp"

namespace depthcomp {

/// Builds a scalar loss from graph inputs.
using InputLossFn = std::function<Var(Graph&, const std::vector<Var>&)>;
/// Builds a scalar loss that reads the parameters under test itself.
using ParamLossFn = std::function<Var(Graph&)>;

/// Max relative error between backward() and central differences
/// (f(x+eps) - f(x-eps)) / (2 eps) over every element of every input.
/// Relative error uses the denominator max(|analytic|, |numeric|, 1e-8).
double grad_check(const InputLossFn& f, const std::vector<Tensor>& inputs,
                  double eps = 1e-5);

/// As grad_check, perturbing parameter values in place (restored on exit).
double grad_check_params(const ParamLossFn& f,
                         const std::vector<Parameter*>& params,
                         double eps = 1e-5);

}  // namespace depthcomp
