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

#include "depthcomp/autograd.hpp"

#include <stdexcept>

namespace depthcomp {

const Tensor& Var::value() const {
  if (!graph_) throw std::logic_error("value() on unbound Var");
  return graph_->value(id_);
}

bool Var::requires_grad() const {
  return graph_ != nullptr && graph_->needs_grad(id_);
}

Var Graph::push(Node node) {
  if (backward_done_) {
    throw std::logic_error("graph already differentiated; build a new one");
  }
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::constant(Tensor t) {
  Node n;
  n.owned = std::move(t);
  return push(std::move(n));
}

Var Graph::constant_ref(const Tensor& t) {
  Node n;
  n.external = &t;
  return push(std::move(n));
}

Var Graph::input(Tensor t) {
  Node n;
  n.owned = std::move(t);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Graph::parameter(Parameter& p) {
  Node n;
  n.external = &p.value;
  n.requires_grad = true;
  n.sink = &p;
  return push(std::move(n));
}

Var Graph::record(Tensor value, std::vector<int> parents, BackwardFn fn) {
  Node n;
  n.owned = std::move(value);
  for (int p : parents) {
    if (p < 0 || p >= static_cast<int>(nodes_.size())) {
      throw std::logic_error("record: parent id out of range");
    }
    n.requires_grad = n.requires_grad || nodes_[p].requires_grad;
  }
  n.parents = std::move(parents);
  if (n.requires_grad) n.backward = std::move(fn);
  return push(std::move(n));
}

const Tensor& Graph::value(int id) const {
  const Node& n = nodes_.at(id);
  return n.external ? *n.external : n.owned;
}

Tensor& Graph::grad_accum(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(value(id).shape());
  return n.grad;
}

void Graph::backward(Var loss) {
  if (loss.graph() != this) {
    throw std::invalid_argument("backward: loss belongs to another graph");
  }
  if (backward_done_) {
    throw std::logic_error("backward called twice on the same graph");
  }
  const Tensor& lv = value(loss.id());
  if (lv.size() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                to_string(lv.shape()));
  }
  backward_done_ = true;
  if (!nodes_[loss.id()].requires_grad) return;

  grad_accum(loss.id())[0] = 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, id);
    if (n.sink) {
      Parameter& p = *n.sink;
      if (p.grad.empty()) {
        p.grad = n.grad;
      } else {
        require_same_shape(p.grad.shape(), n.grad.shape(), "parameter grad");
        for (std::size_t i = 0; i < n.grad.size(); ++i) p.grad[i] += n.grad[i];
      }
    }
  }
}

const Tensor& Graph::grad(Var v) const {
  if (!backward_done_) throw std::logic_error("grad() before backward()");
  const Node& n = nodes_.at(v.id());
  if (!n.requires_grad) {
    throw std::logic_error("grad() on a node that does not require grad");
  }
  if (n.grad.empty()) {
    // Unreached by the loss: gradient is zero.
    const_cast<Node&>(n).grad = Tensor(value(v.id()).shape());
  }
  return n.grad;
}

}  // namespace depthcomp
