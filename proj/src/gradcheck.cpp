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

#include "depthcomp/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace depthcomp {
namespace {

double rel_err(double analytic, double numeric) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

void check_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument("grad_check: eps must be positive and finite");
  }
}

}  // namespace

double grad_check(const InputLossFn& f, const std::vector<Tensor>& inputs,
                  double eps) {
  check_eps(eps);
  std::vector<Tensor> analytic;
  {
    Graph g;
    std::vector<Var> vars;
    for (const auto& t : inputs) vars.push_back(g.input(t));
    g.backward(f(g, vars));
    for (const auto& v : vars) analytic.push_back(g.grad(v));
  }
  auto eval = [&](const std::vector<Tensor>& xs) {
    Graph g;
    std::vector<Var> vars;
    for (const auto& t : xs) vars.push_back(g.constant(t));
    return f(g, vars).value().item();
  };
  std::vector<Tensor> work = inputs;
  double worst = 0.0;
  for (std::size_t k = 0; k < work.size(); ++k) {
    for (std::size_t i = 0; i < work[k].size(); ++i) {
      const double x0 = work[k][i];
      work[k][i] = x0 + eps;
      const double fp = eval(work);
      work[k][i] = x0 - eps;
      const double fm = eval(work);
      work[k][i] = x0;
      worst = std::max(worst, rel_err(analytic[k][i], (fp - fm) / (2 * eps)));
    }
  }
  return worst;
}

double grad_check_params(const ParamLossFn& f,
                         const std::vector<Parameter*>& params,
                         double eps) {
  check_eps(eps);
  for (Parameter* p : params) p->zero_grad();
  {
    Graph g;
    g.backward(f(g));
  }
  std::vector<Tensor> analytic;
  for (Parameter* p : params) {
    analytic.push_back(p->has_grad() ? p->grad : Tensor(p->value.shape()));
    p->zero_grad();
  }
  auto eval = [&] {
    Graph g;
    return f(g).value().item();
  };
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& value = params[k]->value;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double x0 = value[i];
      value[i] = x0 + eps;
      const double fp = eval();
      value[i] = x0 - eps;
      const double fm = eval();
      value[i] = x0;
      worst = std::max(worst, rel_err(analytic[k][i], (fp - fm) / (2 * eps)));
    }
  }
  for (Parameter* p : params) p->zero_grad();
  return worst;
}

}  // namespace depthcomp
