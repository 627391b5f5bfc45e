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

#include "depthcomp/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace depthcomp {
namespace {

void require_exponent(int p, const char* what) {
  if (p != 1 && p != 2) {
    throw std::invalid_argument(std::string(what) + " must be 1 or 2, got " +
                                std::to_string(p));
  }
}

void require_nonempty_mask(const Tensor& mask, const char* what) {
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0.0) return;
  }
  throw std::invalid_argument(std::string(what) + ": no valid pixels");
}

// Repeats a (n,1,h,w) mask over c channels.
Tensor broadcast_channels(const Tensor& mask, int c) {
  const Shape s = mask.shape();
  Tensor out({s.n, c, s.h, s.w});
  for (int n = 0; n < s.n; ++n) {
    for (int ch = 0; ch < c; ++ch) {
      for (int y = 0; y < s.h; ++y) {
        for (int x = 0; x < s.w; ++x) out.at(n, ch, y, x) = mask.at(n, 0, y, x);
      }
    }
  }
  return out;
}

void check_stereo_inputs(Var image, Var image_prime, Var d) {
  require_same_shape(image.shape(), image_prime.shape(), "stereo pair");
  const Shape is = image.shape();
  const Shape ds = d.shape();
  if (ds.n != is.n || ds.c != 1 || ds.h != is.h || ds.w != is.w) {
    throw std::invalid_argument("depth " + to_string(ds) +
                                " not aligned with image " + to_string(is));
  }
}

}  // namespace

void NormSpec::validate() const {
  require_exponent(gamma, "gamma");
  require_exponent(eta, "eta");
}

void LossWeights::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(beta_c >= 0.0) ||
      !(beta_s >= 0.0)) {
    throw std::invalid_argument("loss weights must be non-negative");
  }
}

Var sparse_fidelity(Var d, const Tensor& z_map, const Tensor& validity,
                    int gamma) {
  require_exponent(gamma, "gamma");
  require_same_shape(d.shape(), z_map.shape(), "sparse_fidelity z");
  require_same_shape(d.shape(), validity.shape(), "sparse_fidelity validity");
  require_nonempty_mask(validity, "sparse_fidelity");
  Graph& g = *d.graph();
  return power_penalty(sub(d, g.constant_ref(z_map)), gamma, &validity);
}

double sparse_fidelity(const Tensor& d, std::span<const double> z,
                       std::span<const std::size_t> omega, int gamma) {
  require_exponent(gamma, "gamma");
  if (omega.empty()) throw std::invalid_argument("sparse_fidelity: empty sample set");
  if (z.size() != omega.size()) {
    throw std::invalid_argument("sparse_fidelity: " + std::to_string(z.size()) +
                                " values for " + std::to_string(omega.size()) +
                                " indices");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (omega[i] >= d.size()) {
      throw std::out_of_range("sparse_fidelity: index " +
                              std::to_string(omega[i]) + " outside lattice");
    }
    const double r = std::abs(z[i] - d[omega[i]]);
    acc += gamma == 1 ? r : r * r;
  }
  return acc;
}

Var supervised_loss(Var pred, const Tensor& gt, const Tensor& gt_validity) {
  require_same_shape(pred.shape(), gt.shape(), "supervised_loss gt");
  require_same_shape(pred.shape(), gt_validity.shape(),
                     "supervised_loss validity");
  require_nonempty_mask(gt_validity, "supervised_loss");
  Graph& g = *pred.graph();
  return power_penalty(sub(pred, g.constant_ref(gt)), 1, &gt_validity);
}

UnsupervisedTerms unsupervised_loss(Var d, const Tensor& z_map,
                                    const Tensor& validity, Var image,
                                    const CpnModel& cpn, const NormSpec& norms,
                                    const LossWeights& weights) {
  norms.validate();
  weights.validate();
  if (norms.eta != cpn.eta()) {
    throw std::invalid_argument("eta " + std::to_string(norms.eta) +
                                " differs from the CPN's " +
                                std::to_string(cpn.eta()));
  }
  UnsupervisedTerms t;
  t.fidelity = sparse_fidelity(d, z_map, validity, norms.gamma);
  t.prior = cpn_score(*d.graph(), cpn, d, image);
  t.total = add(t.fidelity, scale(t.prior, weights.alpha));
  return t;
}

Var photometric_raw(Var image, Var image_prime, Var d, const StereoRig& rig,
                    int sign) {
  check_stereo_inputs(image, image_prime, d);
  Var s = disparity_from_depth(d, rig);
  WarpResult w = warp_horizontal(image_prime, s, sign);
  const Tensor mask = broadcast_channels(w.in_bounds, image.shape().c);
  return power_penalty(sub(image, w.warped), 1, &mask);
}

Var photometric_ssim(Var image, Var image_prime, Var d, const StereoRig& rig,
                     int sign) {
  check_stereo_inputs(image, image_prime, d);
  Var s = disparity_from_depth(d, rig);
  WarpResult w = warp_horizontal(image_prime, s, sign);
  Var dissim = add_scalar(scale(ssim_map(image, w.warped), -1.0), 1.0);
  Graph& g = *d.graph();
  return sum(mul(dissim, g.constant(std::move(w.in_bounds))));
}

PhotometricMap photometric_residual(const Tensor& image,
                                    const Tensor& image_prime,
                                    const Tensor& d, const StereoRig& rig,
                                    int sign) {
  Graph g;
  Var iv = g.constant_ref(image);
  Var dv = g.constant_ref(d);
  check_stereo_inputs(iv, g.constant_ref(image_prime), dv);
  WarpResult w = warp_horizontal(g.constant_ref(image_prime),
                                 disparity_from_depth(dv, rig), sign);
  const Shape s = image.shape();
  PhotometricMap out{Tensor({s.n, 1, s.h, s.w}), std::move(w.in_bounds)};
  const Tensor& warped = w.warped.value();
  for (int n = 0; n < s.n; ++n) {
    for (int y = 0; y < s.h; ++y) {
      for (int x = 0; x < s.w; ++x) {
        if (out.in_bounds.at(n, 0, y, x) == 0.0) continue;
        double acc = 0.0;
        for (int c = 0; c < s.c; ++c) {
          acc += std::abs(image.at(n, c, y, x) - warped.at(n, c, y, x));
        }
        out.residual.at(n, 0, y, x) = acc;
      }
    }
  }
  return out;
}

StereoTerms stereo_loss(Var d, const Tensor& z_map, const Tensor& validity,
                        Var image, Var image_prime, const StereoRig& rig,
                        const CpnModel& cpn, const NormSpec& norms,
                        const LossWeights& weights, int sign) {
  StereoTerms t;
  t.unsupervised =
      unsupervised_loss(d, z_map, validity, image, cpn, norms, weights);
  t.psi_c = photometric_raw(image, image_prime, d, rig, sign);
  t.psi_s = photometric_ssim(image, image_prime, d, rig, sign);
  t.total = add(t.unsupervised.total,
                add(scale(t.psi_c, weights.beta_c),
                    scale(t.psi_s, weights.beta_s)));
  return t;
}

double posterior_score(const Tensor& d, const Tensor& z_map,
                       const Tensor& validity, const Tensor& image,
                       const CpnModel& cpn, const NormSpec& norms,
                       double alpha) {
  LossWeights w;
  w.alpha = alpha;
  Graph g;
  UnsupervisedTerms t = unsupervised_loss(g.constant_ref(d), z_map, validity,
                                          g.constant_ref(image), cpn, norms, w);
  return t.total.value().item();
}

}  // namespace depthcomp
