// Copyright 2026 The SpikCommander Engine Authors
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

#include "spkc/tape.hpp"

#include <algorithm>

#include "spkc/errors.hpp"

namespace spkc {

Parameter::Parameter(std::string n, Tensor v, bool d)
    : name(std::move(n)), value(v.detach()), grad(value.numel(), 0.0), decay(d) {}

void Parameter::zero_grad() {
  grad.assign(value.numel(), 0.0);
}

void Parameter::assign(std::vector<double> values) {
  value = Tensor(value.shape(), std::move(values));
}

Tensor Tape::attach(Tensor t, std::size_t numel) {
  if (consumed_) throw ContractError("tape already consumed by backward");
  Node node;
  node.numel = numel;
  nodes_.push_back(std::move(node));
  t.tape_ = this;
  t.node_ = static_cast<int>(nodes_.size() - 1);
  return t;
}

Tensor Tape::leaf(Parameter& param) {
  Tensor t = attach(param.value.detach(), param.numel());
  nodes_.back().param = &param;
  if (param.grad.size() != param.numel()) param.zero_grad();
  return t;
}

Tensor Tape::variable(const Tensor& value) {
  return attach(value.detach(), value.numel());
}

Tensor Tape::record(Shape shape, std::vector<double> data, BackwardFn fn) {
  Tensor t = attach(Tensor(std::move(shape), std::move(data)), 0);
  nodes_.back().numel = t.numel();
  nodes_.back().backward = std::move(fn);
  return t;
}

void Tape::accumulate(const Tensor& input, std::span<const double> g) {
  if (input.tape() != this) return;
  auto& node = nodes_.at(static_cast<std::size_t>(input.node()));
  if (g.size() != node.numel) {
    throw ContractError("gradient length mismatch on tape node " + std::to_string(input.node()));
  }
  if (node.grad.empty()) {
    node.grad.assign(g.begin(), g.end());
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) node.grad[i] += g[i];
}

void Tape::backward(const Tensor& loss) {
  if (consumed_) throw ContractError("backward called twice on the same tape");
  if (loss.tape() != this) throw ContractError("loss is not recorded on this tape");
  if (loss.numel() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " + shape_str(loss.shape()));
  }
  consumed_ = true;
  visited_ = 0;
  auto& seed = nodes_[static_cast<std::size_t>(loss.node())];
  seed.grad.assign(1, 1.0);
  for (std::size_t i = static_cast<std::size_t>(loss.node()) + 1; i-- > 0;) {
    auto& node = nodes_[i];
    if (node.grad.empty()) continue;
    ++visited_;
    if (node.param) {
      auto& pg = node.param->grad;
      for (std::size_t k = 0; k < pg.size(); ++k) pg[k] += node.grad[k];
    }
    if (node.backward) {
      // Moved out so captured tensors are released as soon as possible.
      auto fn = std::move(node.backward);
      fn(*this, node.grad);
    }
  }
}

std::vector<double> Tape::grad(const Tensor& t) const {
  if (t.tape() != this) throw ContractError("tensor is not recorded on this tape");
  const auto& node = nodes_.at(static_cast<std::size_t>(t.node()));
  if (node.grad.empty()) return std::vector<double>(node.numel, 0.0);
  return node.grad;
}

Tape* common_tape(std::initializer_list<const Tensor*> inputs) {
  Tape* tape = nullptr;
  for (const Tensor* t : inputs) {
    if (!t || !t->recorded()) continue;
    if (tape && tape != t->tape()) throw ContractError("inputs recorded on different tapes");
    tape = t->tape();
  }
  return tape;
}

}  // namespace spkc
