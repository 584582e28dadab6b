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

#include <cstdint>
#include <span>
#include <vector>

namespace spkc {

/// Per-(time step, sample) validity; false marks zero-padding.
///
/// Stored time-major (index t * batch + b). Valid steps form a prefix of
/// each sample.
class TemporalMask {
 public:
  TemporalMask() = default;
  /// Throws InputError unless every column is a valid-prefix pattern.
  TemporalMask(std::size_t steps, std::size_t batch, std::vector<std::uint8_t> valid);

  static TemporalMask all_valid(std::size_t steps, std::size_t batch);
  /// Sample b is valid on its first lengths[b] steps.
  static TemporalMask from_lengths(std::size_t steps, std::span<const std::size_t> lengths);

  std::size_t steps() const noexcept { return steps_; }
  std::size_t batch() const noexcept { return batch_; }
  bool valid(std::size_t t, std::size_t b) const { return valid_[t * batch_ + b] != 0; }
  std::size_t valid_steps(std::size_t b) const;
  /// 1.0 / 0.0 weights in time-major order.
  std::vector<double> weights() const;
  /// Same mask padded (invalid) or truncated to `steps`.
  TemporalMask resized(std::size_t steps) const;

 private:
  std::size_t steps_ = 0;
  std::size_t batch_ = 0;
  std::vector<std::uint8_t> valid_;
};

}  // namespace spkc
