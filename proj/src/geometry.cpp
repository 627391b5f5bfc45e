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

#include "depthcomp/geometry.hpp"

#include <stdexcept>

namespace depthcomp {
namespace {

void require_positive(const Tensor& t, const char* what) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0)) {
      throw std::invalid_argument(std::string(what) +
                                  ": non-positive value " +
                                  std::to_string(t[i]) + " at element " +
                                  std::to_string(i));
    }
  }
}

}  // namespace

void StereoRig::validate() const {
  if (!(focal_px > 0.0) || !(baseline_m > 0.0)) {
    throw std::invalid_argument("stereo rig needs focal_px > 0 and baseline_m > 0");
  }
}

Var disparity_from_depth(Var depth, const StereoRig& rig) {
  rig.validate();
  require_positive(depth.value(), "disparity_from_depth");
  return reciprocal(depth, rig.fb());
}

Tensor disparity_from_depth(const Tensor& depth, const StereoRig& rig) {
  rig.validate();
  require_positive(depth, "disparity_from_depth");
  Tensor s(depth.shape());
  const double fb = rig.fb();
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = fb / depth[i];
  return s;
}

Tensor depth_from_disparity(const Tensor& disparity, const StereoRig& rig) {
  rig.validate();
  require_positive(disparity, "depth_from_disparity");
  Tensor d(disparity.shape());
  const double fb = rig.fb();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = fb / disparity[i];
  return d;
}

Var ssim_map(Var a, Var b) {
  const Shape s = a.shape();
  require_same_shape(s, b.shape(), "ssim_map");
  if (s.h < 3 || s.w < 3) {
    throw std::invalid_argument("ssim_map: image " + to_string(s) +
                                " smaller than 3x3");
  }
  Var mu_a = avg_pool3x3(a);
  Var mu_b = avg_pool3x3(b);
  Var mu_aa = mul(mu_a, mu_a);
  Var mu_bb = mul(mu_b, mu_b);
  Var mu_ab = mul(mu_a, mu_b);
  Var var_a = sub(avg_pool3x3(mul(a, a)), mu_aa);
  Var var_b = sub(avg_pool3x3(mul(b, b)), mu_bb);
  Var cov = sub(avg_pool3x3(mul(a, b)), mu_ab);
  Var num = mul(add_scalar(scale(mu_ab, 2.0), kSsimC1),
                add_scalar(scale(cov, 2.0), kSsimC2));
  Var den = mul(add_scalar(add(mu_aa, mu_bb), kSsimC1),
                add_scalar(add(var_a, var_b), kSsimC2));
  return mean_channels(div(num, den));
}

}  // namespace depthcomp
