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

#include <random>
#include <string>
#include <vector>

#include "spkc/batchnorm.hpp"
#include "spkc/context.hpp"
#include "spkc/tape.hpp"

namespace spkc {

/// Weights drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Tensor uniform_init(Shape shape, std::size_t fan_in, std::mt19937_64& rng);

enum class ProjectionKind { kPconv, kLinear };

/// A {PConv|Linear}-BN-SN unit; its output is a spike tensor.
struct ProjectionBlock {
  ProjectionBlock() = default;
  ProjectionBlock(std::string name, std::size_t in, std::size_t out, ProjectionKind kind,
                  std::mt19937_64& rng);

  std::string name;
  ProjectionKind kind = ProjectionKind::kPconv;
  Parameter weight;  // (in, out)
  Parameter bias;    // (out)
  BatchNormState bn;

  std::size_t in_features() const { return weight.value.dim(0); }
  std::size_t out_features() const { return weight.value.dim(1); }

  /// BN output (before dropout and the spike function).
  Tensor preactivation(const Tensor& x, const ForwardContext& ctx);
  Tensor forward(const Tensor& x, const ForwardContext& ctx);

  void parameters(std::vector<Parameter*>& out);
  void norms(std::vector<BatchNormState*>& out);
  void fold();
};

/// DConv-BN-SN over time with a per-channel (C, k) kernel.
struct DepthwiseBlock {
  DepthwiseBlock() = default;
  DepthwiseBlock(std::string name, std::size_t channels, std::size_t k, std::mt19937_64& rng);

  std::string name;
  Parameter kernel;  // (C, k)
  Parameter bias;    // (C)
  BatchNormState bn;

  Tensor forward(const Tensor& x, const ForwardContext& ctx);

  void parameters(std::vector<Parameter*>& out);
  void norms(std::vector<BatchNormState*>& out);
  void fold();
};

}  // namespace spkc
