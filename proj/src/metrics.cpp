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

#include "depthcomp/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace depthcomp {

void MetricSums::add(const Tensor& pred, const Tensor& gt,
                     const Tensor& validity) {
  require_same_shape(pred.shape(), gt.shape(), "metrics gt");
  require_same_shape(pred.shape(), validity.shape(), "metrics validity");
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (validity[i] == 0.0) continue;
    const double p = pred[i], g = gt[i];
    if (!(p > 0.0) || !(g > 0.0)) {
      throw std::invalid_argument("metrics: non-positive depth at valid pixel " +
                                  std::to_string(i));
    }
    const double e = p - g;
    const double ie = 1.0 / p - 1.0 / g;
    sq += e * e;
    abs += std::abs(e);
    inv_sq += ie * ie;
    inv_abs += std::abs(ie);
    rel += std::abs(e) / g;
    ++n;
  }
}

EvalResult MetricSums::finish() const {
  if (n == 0) throw std::invalid_argument("metrics: no valid pixels");
  const double k = static_cast<double>(n);
  EvalResult r;
  r.rmse_mm = std::sqrt(sq / k) * 1000.0;
  r.mae_mm = abs / k * 1000.0;
  r.irmse_per_km = std::sqrt(inv_sq / k) * 1000.0;
  r.imae_per_km = inv_abs / k * 1000.0;
  r.absrel = rel / k;
  r.n_valid = n;
  return r;
}

EvalResult compute_metrics(const Tensor& pred, const Tensor& gt,
                           const Tensor& validity) {
  MetricSums s;
  s.add(pred, gt, validity);
  return s.finish();
}

EvalResult mean_of(std::span<const EvalResult> per_image) {
  if (per_image.empty()) throw std::invalid_argument("metrics: no images");
  EvalResult m;
  for (const auto& r : per_image) {
    m.rmse_mm += r.rmse_mm;
    m.mae_mm += r.mae_mm;
    m.irmse_per_km += r.irmse_per_km;
    m.imae_per_km += r.imae_per_km;
    m.absrel += r.absrel;
    m.n_valid += r.n_valid;
  }
  const double k = static_cast<double>(per_image.size());
  m.rmse_mm /= k;
  m.mae_mm /= k;
  m.irmse_per_km /= k;
  m.imae_per_km /= k;
  m.absrel /= k;
  return m;
}

EvalResult aggregate(std::span<const EvalResult> per_image,
                     std::span<const MetricSums> sums, Aggregation mode) {
  if (mode == Aggregation::per_image) return mean_of(per_image);
  MetricSums total;
  for (const auto& s : sums) {
    total.sq += s.sq;
    total.abs += s.abs;
    total.inv_sq += s.inv_sq;
    total.inv_abs += s.inv_abs;
    total.rel += s.rel;
    total.n += s.n;
  }
  return total.finish();
}

void write_metrics_header(std::ostream& os) {
  os << "id,rmse_mm,mae_mm,irmse_per_km,imae_per_km,absrel,n_valid\n";
}

void write_metrics_row(std::ostream& os, const std::string& id,
                       const EvalResult& r) {
  // %.17g round-trips doubles, so reruns compare byte for byte.
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%lld",
                r.rmse_mm, r.mae_mm, r.irmse_per_km, r.imae_per_km, r.absrel,
                static_cast<long long>(r.n_valid));
  os << id << "," << buf << "\n";
}

}  // namespace depthcomp
