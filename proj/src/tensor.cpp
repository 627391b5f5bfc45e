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

#include "depthcomp/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace depthcomp {

std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.n) + ", " + std::to_string(s.c) + ", " +
         std::to_string(s.h) + ", " + std::to_string(s.w) + ")";
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape) {
  if (shape.n < 0 || shape.c < 0 || shape.h < 0 || shape.w < 0) {
    throw std::invalid_argument("negative tensor extent " + to_string(shape));
  }
  data_.assign(shape.numel(), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape.numel()) {
    throw std::invalid_argument("tensor data length " +
                                std::to_string(data_.size()) +
                                " does not match shape " + to_string(shape));
  }
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw std::invalid_argument("item() on non-scalar tensor of shape " +
                                to_string(shape_));
  }
  return data_[0];
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor Tensor::batch_item(int b) const {
  if (b < 0 || b >= shape_.n) {
    throw std::out_of_range("batch index " + std::to_string(b) +
                            " outside " + to_string(shape_));
  }
  Shape s{1, shape_.c, shape_.h, shape_.w};
  const std::size_t len = s.numel();
  const auto first = data_.begin() + static_cast<std::ptrdiff_t>(b * len);
  return Tensor(s, std::vector<double>(first, first + len));
}

Tensor stack_batch(std::span<const Tensor> items) {
  if (items.empty()) throw std::invalid_argument("stack_batch: no items");
  const Shape s0 = items.front().shape();
  Shape out{0, s0.c, s0.h, s0.w};
  std::vector<double> data;
  for (const auto& t : items) {
    const Shape s = t.shape();
    if (s.c != s0.c || s.h != s0.h || s.w != s0.w) {
      throw std::invalid_argument("stack_batch: shape " + to_string(s) +
                                  " incompatible with " + to_string(s0));
    }
    out.n += s.n;
    data.insert(data.end(), t.vec().begin(), t.vec().end());
  }
  return Tensor(out, std::move(data));
}

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (!(a == b)) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch " +
                                to_string(a) + " vs " + to_string(b));
  }
}

}  // namespace depthcomp
