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

// Run configuration, read from INI-style text:
//
//   [run]     mode, preset, cpn_preset, seed, out, cpn_checkpoint, resume,
//             unsupervised_variant
//   [loss]    gamma, eta, alpha, beta, beta_c, beta_s
//   [optim]   lr, half_every, steps, batch, eval_every
//   [data]    manifest, scenes, seed, height, width, density, stereo,
//             min_depth, max_depth, supersample
//   [augment] crop_height, crop_width, flip_h, flip_v, hist_eq, sparse_shift
//
// Every key is optional; unknown sections or keys are rejected.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "depthcomp/losses.hpp"
#include "depthcomp/scene.hpp"

namespace depthcomp {

enum class Mode { cpn, supervised, unsupervised, stereo };

Mode parse_mode(std::string_view s);
std::string_view to_string(Mode m);

struct OptimConfig {
  double lr = 1e-4;
  int half_every = 1000;
  int steps = 5000;  // 0 saves the initialisation
  int batch = 4;
  int eval_every = 250;
};

struct DataConfig {
  std::filesystem::path manifest;  // empty: generate scenes
  int scenes = 200;
  std::uint64_t seed = 1;
  SceneConfig scene;
  double density = 0.05;
  AugmentationConfig augment;
};

struct RunConfig {
  Mode mode = Mode::supervised;
  std::string preset = "desk";
  std::string cpn_preset = "desk";
  bool unsupervised_variant = false;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "runs/default";
  std::filesystem::path cpn_checkpoint;
  std::filesystem::path resume;
  NormSpec norms;
  LossWeights weights;
  OptimConfig optim;
  DataConfig data;

  void validate() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string to_ini(const RunConfig& cfg);

}  // namespace depthcomp
