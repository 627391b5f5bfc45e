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

#include "depthcomp/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace depthcomp {

double LrSchedule::at(std::int64_t step) const {
  if (half_every <= 0) throw std::invalid_argument("half_every must be > 0");
  return std::ldexp(lr0, -static_cast<int>(step / half_every));
}

AdamState make_adam_state(const std::vector<Parameter*>& params, double lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  AdamState s;
  s.lr = lr;
  for (const Parameter* p : params) {
    s.m.emplace_back(p->value.shape());
    s.v.emplace_back(p->value.shape());
  }
  return s;
}

void adam_step(const std::vector<Parameter*>& params, AdamState& state) {
  if (params.size() != state.m.size() || params.size() != state.v.size()) {
    throw std::invalid_argument("adam_step: state does not match parameters");
  }
  if (!(state.lr > 0.0)) throw std::invalid_argument("adam_step: lr <= 0");
  for (const Parameter* p : params) {
    if (!p->has_grad()) {
      throw std::invalid_argument("adam_step: parameter '" + p->name +
                                  "' has no gradient");
    }
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    Tensor& m = state.m[k];
    Tensor& v = state.v[k];
    require_same_shape(m.shape(), p.value.shape(), "adam_step moments");
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double mh = m[i] / bc1;
      const double vh = v[i] / bc2;
      p.value[i] -= state.lr * mh / (std::sqrt(vh) + state.epsilon);
    }
    p.zero_grad();
  }
}

}  // namespace depthcomp
