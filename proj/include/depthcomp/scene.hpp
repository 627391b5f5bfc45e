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

// Procedural driving-like scenes, sparse sampling and augmentation.
//
// World frame: camera at the origin looking down +z, y up, x right. The
// ground is the plane y = -camera_height; a textured wall closes the view
// before max_depth. Boxes and vertical cylinders stand on the ground. Images
// are ray cast with supersampling, so the stereo view (camera at x = -B) is
// consistent with the reference view everywhere except at occlusions and
// with warp sign +1: I(x) = I'(x + F B / d(x)).

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "depthcomp/geometry.hpp"
#include "depthcomp/tensor.hpp"

namespace depthcomp {

struct SceneConfig {
  int height = 64;
  int width = 192;
  double min_depth = 1.0;
  double max_depth = 80.0;
  /// 0 selects width / 2.
  double focal_px = 0.0;
  double baseline_m = 0.54;
  double camera_height = 1.65;
  int min_objects = 2;
  int max_objects = 6;
  bool stereo = true;
  /// Rays per pixel along each axis.
  int supersample = 2;

  double resolved_focal() const;
  void validate() const;
};

struct Scene {
  Tensor image;         // (1,3,H,W) in [0,1]
  Tensor depth;         // (1,1,H,W) metres
  Tensor validity;      // (1,1,H,W) 1 where depth is annotated
  Tensor stereo_image;  // (1,3,H,W); empty without a stereo pair
  /// 1 where the surface seen at a pixel is hidden from the stereo camera.
  /// Test-only; no loss reads it.
  Tensor occlusion;
  std::optional<StereoRig> rig;
  /// Sign for warp_horizontal; a horizontal flip negates it.
  int warp_sign = 1;
  std::uint64_t seed = 0;

  bool has_stereo() const { return !stereo_image.empty() && rig.has_value(); }
};

Scene generate_scene(std::uint64_t seed, const SceneConfig& cfg);

/// Seed of the i-th scene of a dataset drawn from `seed`.
std::uint64_t scene_seed(std::uint64_t seed, std::size_t index);

struct SparseSample {
  std::vector<std::size_t> omega;  // sorted flat pixel offsets
  std::vector<double> z;           // depth at each omega entry
  Tensor z_map;                    // (1,1,H,W), zero off omega
  Tensor validity;                 // (1,1,H,W), 1 exactly on omega
  double density = 0.0;            // K / (H W)

  std::size_t size() const { return omega.size(); }
};

/// Draws K = floor(density * H * W + 0.5) distinct valid pixels uniformly.
/// `valid` restricts the candidates (all pixels when empty). Optional
/// Gaussian noise with standard deviation `noise_std` metres is added to z.
SparseSample sample_sparse(const Tensor& depth, double density,
                           std::uint64_t seed, const Tensor& valid = {},
                           double noise_std = 0.0);
SparseSample sample_sparse(const Scene& scene, double density,
                           std::uint64_t seed);

/// Rebuilds z_map and validity from (omega, z) for a (1,1,h,w) lattice.
SparseSample make_sparse(std::vector<std::size_t> omega, std::vector<double> z,
                         int height, int width);

struct AugmentationConfig {
  int crop_height = 0;  // 0 keeps the full height
  int crop_width = 0;   // 0 keeps the full width
  double flip_h = 0.0;  // probabilities
  double flip_v = 0.0;
  bool hist_eq = false;
  bool sparse_shift = false;

  void validate() const;
};

struct Augmented {
  Scene scene;
  SparseSample sample;
};

Augmented augment(const Scene& scene, const SparseSample& sample,
                  const AugmentationConfig& cfg, std::uint64_t seed);

/// Individual transforms, exposed for testing.
Augmented crop(const Scene& scene, const SparseSample& sample, int top,
               int left, int height, int width);
Augmented flip_horizontal(const Scene& scene, const SparseSample& sample);
Augmented flip_vertical(const Scene& scene, const SparseSample& sample);
/// Equalises the luminance histogram of scene.image and applies the same
/// tone curve to the stereo image.
Scene equalize_histogram(const Scene& scene);
/// Moves each sample by an offset in {-1,0,1}^2. Points leaving the image
/// are dropped; on collision the larger depth is kept.
SparseSample shift_sparse(const SparseSample& sample, int height, int width,
                          std::uint64_t seed);

/// Dense depth where each pixel copies the nearest sample (Euclidean pixel
/// distance, ties to the lower offset).
Tensor nearest_fill(const SparseSample& sample, int height, int width);

}  // namespace depthcomp
