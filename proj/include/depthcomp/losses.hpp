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

// Training objectives. Every loss is a sum over pixels, never a mean.

#pragma once

#include <cstddef>
#include <span>

#include "depthcomp/autograd.hpp"
#include "depthcomp/geometry.hpp"
#include "depthcomp/networks.hpp"

namespace depthcomp {

struct NormSpec {
  int gamma = 1;  // exponent on the sparse fidelity term
  int eta = 2;    // exponent on the prior term

  void validate() const;
};

struct LossWeights {
  double alpha = 0.045;
  double beta = 1.2;
  double beta_c = 0.15;
  double beta_s = 0.425;

  void validate() const;
};

/// sum over validity of |d - z_map|^gamma. `validity` is 0/1, (n,1,h,w),
/// and must select at least one pixel.
Var sparse_fidelity(Var d, const Tensor& z_map, const Tensor& validity,
                    int gamma);

/// Index form: omega holds flat offsets into `d`, z the matching values.
double sparse_fidelity(const Tensor& d, std::span<const double> z,
                       std::span<const std::size_t> omega, int gamma);

/// sum over valid pixels of |pred - gt| (gamma fixed at 1).
Var supervised_loss(Var pred, const Tensor& gt, const Tensor& gt_validity);

struct UnsupervisedTerms {
  Var total;     // fidelity + alpha * prior
  Var fidelity;
  Var prior;
};

/// `d` is the DCN output. The CPN is evaluated with frozen parameters, so
/// gradients reach `d` through it but never the CPN weights. The prior term
/// uses cpn.eta(); norms.eta must agree with it.
UnsupervisedTerms unsupervised_loss(Var d, const Tensor& z_map,
                                    const Tensor& validity, Var image,
                                    const CpnModel& cpn, const NormSpec& norms,
                                    const LossWeights& weights);

/// Per-pixel L1 colour difference between `image` and `image_prime` warped
/// by the disparity of `d`, summed over in-bounds pixels.
Var photometric_raw(Var image, Var image_prime, Var d, const StereoRig& rig,
                    int sign = 1);

/// sum over in-bounds pixels of 1 - SSIM(image, warped image_prime).
Var photometric_ssim(Var image, Var image_prime, Var d, const StereoRig& rig,
                     int sign = 1);

struct PhotometricMap {
  Tensor residual;   // (n,1,h,w) per-pixel L1 colour difference
  Tensor in_bounds;  // (n,1,h,w)
};

/// Forward-only per-pixel breakdown of photometric_raw.
PhotometricMap photometric_residual(const Tensor& image,
                                    const Tensor& image_prime,
                                    const Tensor& d, const StereoRig& rig,
                                    int sign = 1);

struct StereoTerms {
  Var total;  // unsupervised + beta_c * psi_c + beta_s * psi_s
  UnsupervisedTerms unsupervised;
  Var psi_c;
  Var psi_s;
};

StereoTerms stereo_loss(Var d, const Tensor& z_map, const Tensor& validity,
                        Var image, Var image_prime, const StereoRig& rig,
                        const CpnModel& cpn, const NormSpec& norms,
                        const LossWeights& weights, int sign = 1);

/// Negative log posterior up to a constant:
/// sparse_fidelity(d) + alpha * cpn_score(d, image).
double posterior_score(const Tensor& d, const Tensor& z_map,
                       const Tensor& validity, const Tensor& image,
                       const CpnModel& cpn, const NormSpec& norms,
                       double alpha);

}  // namespace depthcomp
