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

#include "spkc/batchnorm.hpp"
#include "spkc/tensor.hpp"

namespace spkc {

struct FoldedWeights {
  Tensor weight;
  Tensor bias;
};

/// Absorbs an eval-mode BN that follows a (Din, Dout) linear map:
/// w' = gamma w / sqrt(var + eps), b' = gamma (b - mean) / sqrt(var + eps) + beta.
/// `bias` may be empty (treated as zero). Throws ConfigError for a
/// train-mode BN or one without running statistics.
FoldedWeights fold_bn(const Tensor& weight, const Tensor& bias, const BatchNormState& bn);

/// Same for a depthwise (C, k) kernel, scaling row c by channel c's factor.
FoldedWeights fold_bn_depthwise(const Tensor& kernel, const Tensor& bias, const BatchNormState& bn);

}  // namespace spkc
