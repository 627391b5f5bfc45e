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

#include <cstdint>
#include <ostream>
#include <span>
#include <string>

#include "depthcomp/tensor.hpp"

namespace depthcomp {

/// Depth errors in KITTI leaderboard units.
struct EvalResult {
  double rmse_mm = 0.0;
  double mae_mm = 0.0;
  double irmse_per_km = 0.0;
  double imae_per_km = 0.0;
  double absrel = 0.0;
  std::int64_t n_valid = 0;
};

/// Running sums over valid pixels; finish() converts to EvalResult.
struct MetricSums {
  double sq = 0.0, abs = 0.0, inv_sq = 0.0, inv_abs = 0.0, rel = 0.0;
  std::int64_t n = 0;

  void add(const Tensor& pred, const Tensor& gt, const Tensor& validity);
  EvalResult finish() const;
};

/// Rejects an empty mask and non-positive depths on valid pixels.
EvalResult compute_metrics(const Tensor& pred, const Tensor& gt,
                           const Tensor& validity);

enum class Aggregation { per_image, per_pixel };

/// per_image: unweighted mean of per-image metrics. per_pixel: metrics over
/// the pooled valid pixels of all images.
EvalResult aggregate(std::span<const EvalResult> per_image,
                     std::span<const MetricSums> sums, Aggregation mode);

/// Mean of per-image results; n_valid is the total.
EvalResult mean_of(std::span<const EvalResult> per_image);

void write_metrics_header(std::ostream& os);
/// `id` is the first CSV column.
void write_metrics_row(std::ostream& os, const std::string& id,
                       const EvalResult& r);

}  // namespace depthcomp
