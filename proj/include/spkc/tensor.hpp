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

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace spkc {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class Tape;

/// Immutable dense tensor of doubles in row-major order.
///
/// Layer activations use the time-major layout (T, B, D). A tensor may carry
/// a handle to a node on a Tape; ops on such tensors are recorded so that
/// Tape::backward can propagate gradients into them.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const noexcept { return data_ ? data_->size() : 0; }
  bool empty() const noexcept { return numel() == 0; }

  std::span<const double> data() const noexcept;
  double operator[](std::size_t i) const { return (*data_)[i]; }
  std::vector<double> to_vector() const;

  Tape* tape() const noexcept { return tape_; }
  int node() const noexcept { return node_; }
  bool recorded() const noexcept { return tape_ != nullptr; }

  /// Same values, no tape handle.
  Tensor detach() const;

 private:
  friend class Tape;

  Shape shape_;
  std::shared_ptr<const std::vector<double>> data_;
  Tape* tape_ = nullptr;
  int node_ = -1;
};

bool is_binary(const Tensor& t);
bool all_finite(const Tensor& t);
/// True when every element is a non-negative integer not above max_value.
bool is_small_integer(const Tensor& t, double max_value);

/// Tensor whose elements are all exactly 0.0 or 1.0.
///
/// Only the spike function and event ingestion create these; the checked
/// factory is the single entry point and validates binarity.
class SpikeTensor {
 public:
  SpikeTensor() = default;

  /// Throws ContractError if any element is not 0 or 1.
  static SpikeTensor checked(Tensor t);

  const Tensor& tensor() const noexcept { return t_; }
  operator const Tensor&() const noexcept { return t_; }  // NOLINT
  const Shape& shape() const noexcept { return t_.shape(); }
  std::size_t numel() const noexcept { return t_.numel(); }

 private:
  explicit SpikeTensor(Tensor t) : t_(std::move(t)) {}
  Tensor t_;
};

}  // namespace spkc
