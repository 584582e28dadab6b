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

#pragma once

#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "spkc/tensor.hpp"

namespace spkc {

/// A trainable tensor plus its gradient accumulator.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value, bool decay = true);

  std::string name;
  Tensor value;
  std::vector<double> grad;
  // Excluded from decoupled weight decay when false (biases, BN affine).
  bool decay = true;

  const Shape& shape() const noexcept { return value.shape(); }
  std::size_t numel() const noexcept { return value.numel(); }
  void zero_grad();
  void assign(std::vector<double> values);
};

/// Reverse-mode record of one forward pass.
///
/// Nodes are appended in execution order, so every node's inputs precede it
/// and reverse recording order is a valid topological order. A tape is
/// single-use: backward may run once, after which the tape is consumed.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::span<const double>)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf node bound to a parameter; backward adds into param.grad.
  Tensor leaf(Parameter& param);
  /// Leaf node for a plain tensor; its gradient is readable via grad().
  Tensor variable(const Tensor& value);

  /// Appends an op node. Inputs that are not on this tape are ignored.
  Tensor record(Shape shape, std::vector<double> data, BackwardFn fn);

  /// Adds g into the gradient of `input` if it is recorded on this tape.
  void accumulate(const Tensor& input, std::span<const double> g);

  void backward(const Tensor& loss);

  /// Gradient of a recorded tensor after backward (zeros if none reached it).
  std::vector<double> grad(const Tensor& t) const;

  std::size_t size() const noexcept { return nodes_.size(); }
  bool consumed() const noexcept { return consumed_; }
  /// Nodes whose backward step ran during the last backward().
  std::size_t visited() const noexcept { return visited_; }

 private:
  struct Node {
    std::size_t numel = 0;
    BackwardFn backward;
    Parameter* param = nullptr;
    std::vector<double> grad;
  };

  Tensor attach(Tensor t, std::size_t numel);

  std::vector<Node> nodes_;
  bool consumed_ = false;
  std::size_t visited_ = 0;
};

/// The tape shared by the recorded inputs, or nullptr if none is recorded.
/// Inputs recorded on two different tapes are a ContractError.
Tape* common_tape(std::initializer_list<const Tensor*> inputs);

}  // namespace spkc
