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

// PNG and manifest I/O.
//
// Depth maps are 16-bit greyscale PNGs storing round(depth_m * 256); 0 marks
// an invalid pixel. Images are 8-bit RGB. A manifest lists one sample per
// line, fields separated by single spaces:
//
//   <image> <depth>
//   <image> <depth> <focal_px> <baseline_m>
//   <image> <depth> <stereo_image> <focal_px> <baseline_m>
//
// Relative paths resolve against the manifest's directory. Blank lines and
// lines starting with '#' are skipped.

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "depthcomp/geometry.hpp"
#include "depthcomp/scene.hpp"
#include "depthcomp/tensor.hpp"

namespace depthcomp {

inline constexpr double kDepthScale = 256.0;

struct DepthMap {
  Tensor depth;     // (1,1,h,w) metres, 0 where invalid
  Tensor validity;  // (1,1,h,w)
};

/// Pixels with validity 0 are stored as 0. Rejects any valid depth >= 256 m
/// or < 0. Valid depths below 1/512 m quantize to 0 and read back invalid.
void write_depth_png(const std::filesystem::path& path, const Tensor& depth,
                     const Tensor& validity);
DepthMap read_depth_png(const std::filesystem::path& path);

/// The stored value round(d * 256) / 256, or 0 where invalid.
Tensor quantize_depth(const Tensor& depth, const Tensor& validity);

/// (1,3,h,w) in [0,1]; values are clamped and rounded to 8 bits.
void write_rgb_png(const std::filesystem::path& path, const Tensor& image);
Tensor read_rgb_png(const std::filesystem::path& path);

struct ManifestEntry {
  std::filesystem::path image;
  std::filesystem::path depth;
  std::filesystem::path stereo_image;  // empty when absent
  std::optional<StereoRig> rig;
  int line = 0;
};

/// Rejects malformed lines and missing files, naming the line number.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path,
                    std::span<const ManifestEntry> entries);

struct Sample {
  Tensor image;
  Tensor depth;     // metres, 0 where invalid
  Tensor validity;
  Tensor stereo_image;
  std::optional<StereoRig> rig;
};

Sample load_sample(const ManifestEntry& entry);
std::vector<Sample> load_manifest(const std::filesystem::path& path);

/// Writes scene_<i>.png, depth_<i>.png (and stereo_<i>.png) plus
/// manifest.txt into `dir`. Returns the manifest path.
std::filesystem::path write_dataset(const std::filesystem::path& dir,
                                    std::span<const Scene> scenes);

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& bytes);

}  // namespace depthcomp
