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

#include "depthcomp/autograd.hpp"

namespace depthcomp {

/// Rectified stereo rig: focal length in pixels, baseline in metres.
struct StereoRig {
  double focal_px = 0.0;
  double baseline_m = 0.0;

  double fb() const { return focal_px * baseline_m; }
  void validate() const;
};

/// Disparity s = F * B / d in pixels. Rejects any d <= 0.
Var disparity_from_depth(Var depth, const StereoRig& rig);
Tensor disparity_from_depth(const Tensor& depth, const StereoRig& rig);

/// Inverse map d = F * B / s. Rejects any s <= 0.
Tensor depth_from_disparity(const Tensor& disparity, const StereoRig& rig);

// SSIM stabilisers for intensities in [0, 1].
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

/// Per-pixel SSIM over uniform 3x3 windows (truncated at the border),
/// averaged over channels: (n, c, h, w) x 2 -> (n, 1, h, w), values in
/// [-1, 1]. Rejects images smaller than 3x3.
Var ssim_map(Var a, Var b);

}  // namespace depthcomp
