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

// Tape-based reverse-mode differentiation.
//
// A Graph records every op applied to its Vars in execution order, so the
// tape is already topologically sorted. backward() walks it once in reverse.
// Each training step builds a fresh Graph; a Graph is single-use for
// differentiation.

#pragma once

#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "depthcomp/tensor.hpp"

namespace depthcomp {

/// A named trainable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;  // empty until a backward pass reaches it

  bool has_grad() const { return !grad.empty(); }
  void zero_grad() { grad = Tensor(); }
};

class Graph;

/// Handle to a node in a Graph. Cheap to copy.
class Var {
 public:
  Var() = default;

  bool valid() const { return graph_ != nullptr; }
  Graph* graph() const { return graph_; }
  int id() const { return id_; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  friend class Graph;
  Var(Graph* g, int id) : graph_(g), id_(id) {}

  Graph* graph_ = nullptr;
  int id_ = -1;
};

class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, int self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Leaf that never receives a gradient.
  Var constant(Tensor t);
  /// Leaf aliasing an external tensor, which must outlive the graph.
  Var constant_ref(const Tensor& t);
  /// Leaf whose gradient is readable through grad() after backward().
  Var input(Tensor t);
  /// Leaf aliasing p.value; backward() accumulates into p.grad.
  Var parameter(Parameter& p);

  /// Records an op output. `fn` may be empty when no parent needs a gradient.
  Var record(Tensor value, std::vector<int> parents, BackwardFn fn);

  void backward(Var loss);
  bool backward_done() const { return backward_done_; }

  /// Gradient of the last backward() loss w.r.t. `v`.
  const Tensor& grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }

  // Used by op implementations during backward.
  const Tensor& value(int id) const;
  bool needs_grad(int id) const { return nodes_[id].requires_grad; }
  const Tensor& out_grad(int id) const { return nodes_[id].grad; }
  /// Zero-initialised on first access.
  Tensor& grad_accum(int id);

 private:
  struct Node {
    Tensor owned;
    const Tensor* external = nullptr;
    Tensor grad;
    std::vector<int> parents;
    BackwardFn backward;
    bool requires_grad = false;
    Parameter* sink = nullptr;
  };

  Var push(Node node);

  std::deque<Node> nodes_;  // deque keeps value references stable
  bool backward_done_ = false;
};

// ---------------------------------------------------------------------------
// Operators. All inputs must belong to the same Graph.

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var add_scalar(Var a, double c);
Var scale(Var a, double c);
/// c / a elementwise.
Var reciprocal(Var a, double c = 1.0);

Var relu(Var x);
/// log(1 + exp(x)), computed without overflow.
Var softplus(Var x);

/// weight: (out_c, in_c, kh, kw); bias: (1, out_c, 1, 1) or invalid Var.
Var conv2d(Var input, Var weight, Var bias, int stride, int padding);

/// weight: (in_c, out_c, kh, kw); bias as for conv2d. Output spatial size is
/// (H - 1) * stride - 2 * padding + kh + output_padding. With
/// output_padding = 0 this is exactly the adjoint of conv2d.
Var conv_transpose2d(Var input, Var weight, Var bias, int stride, int padding,
                     int output_padding = 0);

Var concat_channels(Var a, Var b);
Var slice_channels(Var x, int begin, int count);
Var upsample_nearest2x(Var x);
/// Mean over the in-image part of each 3x3 neighbourhood.
Var avg_pool3x3(Var x);
/// (n, c, h, w) -> (n, 1, h, w).
Var mean_channels(Var x);
/// Sum of all elements, as a (1,1,1,1) tensor.
Var sum(Var x);

/// sum_i mask_i * |x_i|^p for p in {1, 2}. The L1 subgradient at 0 is 0.
Var power_penalty(Var x, int p, const Tensor* mask = nullptr);

struct WarpResult {
  Var warped;         // same shape as the source image
  Tensor in_bounds;   // (n, 1, h, w), 1 where the sample lies in [0, W-1]
};

/// Samples `image` along each row at column x + sign * shift(x) with linear
/// interpolation. `shift` is (n, 1, h, w). Differentiable w.r.t. both.
/// Out-of-bounds pixels hold the nearest edge column and pass no gradient
/// to `shift`.
WarpResult warp_horizontal(Var image, Var shift, int sign);

}  // namespace depthcomp
