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

#include <string>
#include <vector>

#include "spkc/tape.hpp"
#include "spkc/tensor.hpp"

namespace spkc {

enum class Mode { kTrain, kEval };

/// Per-channel batch normalization parameters and running statistics.
///
/// Channels are axis 2 of the input. In train mode statistics are taken
/// jointly over every other axis (time, batch and any trailing axis).
struct BatchNormState {
  BatchNormState() = default;
  BatchNormState(const std::string& name, std::size_t channels);

  Parameter gamma;
  Parameter beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double eps = 1e-5;
  double momentum = 0.1;
  Mode mode = Mode::kTrain;
  // Set once running statistics exist (a train step or explicit init).
  bool stats_ready = false;
  // Affine map already absorbed into the preceding linear layer.
  bool folded = false;

  std::size_t channels() const noexcept { return running_mean.size(); }
  /// Running mean 0, variance 1, marks statistics as ready.
  void init_running_stats();
  /// Per-channel (scale, shift) of the eval-mode affine map.
  std::vector<double> eval_scale() const;
  std::vector<double> eval_shift() const;
};

/// Normalizes x over channel axis 2. `gamma`/`beta` are the tensors to use
/// for the affine parameters (tape leaves while training, plain values
/// otherwise). Train mode updates the running statistics in `state`.
Tensor batchnorm(const Tensor& x, BatchNormState& state, const Tensor& gamma, const Tensor& beta);
/// Convenience overload using the unrecorded parameter values.
Tensor batchnorm(const Tensor& x, BatchNormState& state);

}  // namespace spkc
