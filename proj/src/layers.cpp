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

#include "spkc/layers.hpp"

#include <cmath>

#include "spkc/fold.hpp"
#include "spkc/ops.hpp"

namespace spkc {

Tensor uniform_init(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> uni(-bound, bound);
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = uni(rng);
  return Tensor(std::move(shape), std::move(v));
}

ProjectionBlock::ProjectionBlock(std::string n, std::size_t in, std::size_t out,
                                 ProjectionKind k, std::mt19937_64& rng)
    : name(std::move(n)),
      kind(k),
      weight(name + ".weight", uniform_init({in, out}, in, rng)),
      bias(name + ".bias", Tensor::zeros({out}), false),
      bn(name + ".bn", out) {}

Tensor ProjectionBlock::preactivation(const Tensor& x, const ForwardContext& ctx) {
  const std::size_t din = in_features(), dout = out_features();
  ctx.note(name, kind == ProjectionKind::kPconv ? LayerKind::kPconv : LayerKind::kLinear,
           static_cast<std::uint64_t>(x.numel() / din) * din * dout, x);
  Tensor y = linear(x, ctx.param(weight), ctx.param(bias));
  if (bn.folded) return y;
  return batchnorm(y, bn, ctx.param(bn.gamma), ctx.param(bn.beta));
}

Tensor ProjectionBlock::forward(const Tensor& x, const ForwardContext& ctx) {
  return ctx.spike(ctx.maybe_dropout(preactivation(x, ctx)));
}

void ProjectionBlock::parameters(std::vector<Parameter*>& out) {
  out.insert(out.end(), {&weight, &bias, &bn.gamma, &bn.beta});
}

void ProjectionBlock::norms(std::vector<BatchNormState*>& out) { out.push_back(&bn); }

void ProjectionBlock::fold() {
  auto f = fold_bn(weight.value, bias.value, bn);
  weight.value = f.weight;
  bias.value = f.bias;
  bn.folded = true;
}

DepthwiseBlock::DepthwiseBlock(std::string n, std::size_t channels, std::size_t k,
                               std::mt19937_64& rng)
    : name(std::move(n)),
      kernel(name + ".kernel", uniform_init({channels, k}, k, rng)),
      bias(name + ".bias", Tensor::zeros({channels}), false),
      bn(name + ".bn", channels) {}

Tensor DepthwiseBlock::forward(const Tensor& x, const ForwardContext& ctx) {
  const std::size_t k = kernel.value.dim(1);
  ctx.note(name, LayerKind::kDconv1d, static_cast<std::uint64_t>(x.numel()) * k, x);
  Tensor y = conv1d_depthwise(x, ctx.param(kernel), ctx.param(bias));
  if (!bn.folded) y = batchnorm(y, bn, ctx.param(bn.gamma), ctx.param(bn.beta));
  return ctx.spike(ctx.maybe_dropout(y));
}

void DepthwiseBlock::parameters(std::vector<Parameter*>& out) {
  out.insert(out.end(), {&kernel, &bias, &bn.gamma, &bn.beta});
}

void DepthwiseBlock::norms(std::vector<BatchNormState*>& out) { out.push_back(&bn); }

void DepthwiseBlock::fold() {
  auto f = fold_bn_depthwise(kernel.value, bias.value, bn);
  kernel.value = f.weight;
  bias.value = f.bias;
  bn.folded = true;
}

}  // namespace spkc
