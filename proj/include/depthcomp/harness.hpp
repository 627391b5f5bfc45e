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

// Training, evaluation, ablation and prediction commands. Each command is a
// library function so tests can drive it in-process; the CLI is a thin
// wrapper.
//
// A training run writes into cfg.out_dir:
//   config.ini   the resolved configuration
//   log.csv      one row per step (appended to on resume)
//   eval.csv     one row per validation pass
//   best.ckpt    checkpoint with the best validation score (+ .bin)
//   last.ckpt    checkpoint after the final step, with optimizer state

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "depthcomp/config.hpp"
#include "depthcomp/metrics.hpp"
#include "depthcomp/networks.hpp"
#include "depthcomp/scene.hpp"

namespace depthcomp {

struct Dataset {
  std::vector<Scene> train;
  std::vector<Scene> val;  // every tenth scene (index % 10 == 9)
};

/// Generates cfg.scenes scenes, or loads cfg.manifest when it is set.
Dataset build_dataset(const DataConfig& cfg);

/// Seed of the fixed sparse sample drawn for validation scene `index`.
std::uint64_t validation_sample_seed(std::uint64_t data_seed, std::size_t index);

/// Mean per-image RMSE (mm) on `val` with fixed sparse samples.
double validation_rmse(const DcnModel& m, const std::vector<Scene>& val,
                       double density, std::uint64_t data_seed);
/// Mean per-image reconstruction penalty.
double validation_penalty(const CpnModel& m, const std::vector<Scene>& val);

struct TrainResult {
  std::filesystem::path best_checkpoint;
  std::filesystem::path last_checkpoint;
  std::int64_t last_step = 0;  // steps completed, counting resumed ones
  double best_val = std::numeric_limits<double>::infinity();
  double final_val = std::numeric_limits<double>::infinity();
  double first_train_loss = 0.0;  // batch loss at the first step run
  double last_train_loss = 0.0;   // batch loss at the last step run
};

/// Rejects cfg.mode != cpn.
TrainResult cmd_train_cpn(const RunConfig& cfg, std::ostream* progress = nullptr);
TrainResult train_cpn(const RunConfig& cfg, const Dataset& data,
                      std::ostream* progress = nullptr);

/// Rejects cfg.mode == cpn, and a missing cfg.cpn_checkpoint in the
/// unsupervised and stereo modes.
TrainResult cmd_train_dcn(const RunConfig& cfg, std::ostream* progress = nullptr);
TrainResult train_dcn(const RunConfig& cfg, const Dataset& data,
                      std::ostream* progress = nullptr);

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path manifest;
  std::filesystem::path out_csv;  // not written when empty
  double density = 0.05;
  std::uint64_t seed = 0;
  Aggregation aggregation = Aggregation::per_image;
};

struct EvalReport {
  EvalResult aggregate;
  std::vector<EvalResult> per_image;
  std::string csv;
};

EvalReport cmd_eval(const EvalOptions& opt);

struct AblationOptions {
  std::vector<std::pair<int, int>> grid;  // (gamma, eta)
  std::vector<double> alphas;
  int cpn_steps = 300;
};

struct AblationRow {
  int gamma = 1;
  int eta = 2;
  double alpha = 0.0;
  double val_rmse_mm = 0.0;
};

/// Trains one CPN per distinct eta, then one unsupervised DCN per grid
/// point with base's budget. Writes <out_dir>/ablation.csv.
std::vector<AblationRow> cmd_ablate(const RunConfig& base,
                                    const AblationOptions& opt,
                                    std::ostream* progress = nullptr);
std::string ablation_csv(const std::vector<AblationRow>& rows);

struct PredictOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path image;
  std::filesystem::path sparse_depth;
  std::filesystem::path gt_depth;        // optional
  std::filesystem::path cpn_checkpoint;  // optional
  std::filesystem::path out_dir;
  int gamma = 1;
  double alpha = 0.045;
  double error_scale_m = 5.0;  // error mapped to the warmest colour
};

struct PredictResult {
  Tensor prediction;
  std::filesystem::path depth_png;
  std::filesystem::path error_png;  // empty without ground truth
  std::optional<double> posterior;
};

PredictResult cmd_predict(const PredictOptions& opt);

/// Blue (t = 0) through cyan, yellow to red (t = 1).
std::array<double, 3> error_color(double t);
/// (1,3,h,w) colour map of |pred - gt| / scale; black off the mask.
Tensor error_map(const Tensor& pred, const Tensor& gt, const Tensor& validity,
                 double scale);

}  // namespace depthcomp
