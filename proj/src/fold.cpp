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

#include "spkc/fold.hpp"

#include "spkc/errors.hpp"

namespace spkc {
namespace {

void require_foldable(const BatchNormState& bn) {
  if (bn.mode != Mode::kEval) throw ConfigError("fold_bn: batch norm must be in eval mode");
  if (!bn.stats_ready) throw ConfigError("fold_bn: batch norm has no running statistics");
  if (bn.folded) throw ConfigError("fold_bn: batch norm already folded");
}

Tensor folded_bias(const Tensor& bias, const BatchNormState& bn, std::span<const double> scale) {
  const std::size_t chans = bn.channels();
  if (!bias.empty() && bias.numel() != chans) {
    throw DimensionError("fold_bn: bias length does not match BN channels");
  }
  auto shift = bn.eval_shift();
  std::vector<double> b(chans);
  for (std::size_t c = 0; c < chans; ++c) b[c] = (bias.empty() ? 0.0 : bias[c]) * scale[c] + shift[c];
  return Tensor({chans}, std::move(b));
}

}  // namespace

FoldedWeights fold_bn(const Tensor& weight, const Tensor& bias, const BatchNormState& bn) {
  require_foldable(bn);
  if (weight.rank() != 2 || weight.dim(1) != bn.channels()) {
    throw DimensionError("fold_bn: weight " + shape_str(weight.shape()) + " vs " +
                         std::to_string(bn.channels()) + " BN channels");
  }
  const std::size_t din = weight.dim(0), dout = weight.dim(1);
  auto scale = bn.eval_scale();
  std::vector<double> w(weight.numel());
  for (std::size_t i = 0; i < din; ++i)
    for (std::size_t j = 0; j < dout; ++j) w[i * dout + j] = weight[i * dout + j] * scale[j];
  return {Tensor(weight.shape(), std::move(w)), folded_bias(bias, bn, scale)};
}

FoldedWeights fold_bn_depthwise(const Tensor& kernel, const Tensor& bias, const BatchNormState& bn) {
  require_foldable(bn);
  if (kernel.rank() != 2 || kernel.dim(0) != bn.channels()) {
    throw DimensionError("fold_bn_depthwise: kernel " + shape_str(kernel.shape()) + " vs " +
                         std::to_string(bn.channels()) + " BN channels");
  }
  const std::size_t chans = kernel.dim(0), k = kernel.dim(1);
  auto scale = bn.eval_scale();
  std::vector<double> w(kernel.numel());
  for (std::size_t c = 0; c < chans; ++c)
    for (std::size_t j = 0; j < k; ++j) w[c * k + j] = kernel[c * k + j] * scale[c];
  return {Tensor(kernel.shape(), std::move(w)), folded_bias(bias, bn, scale)};
}

}  // namespace spkc
