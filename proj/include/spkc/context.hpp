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
#include <random>
#include <string>

#include "spkc/batchnorm.hpp"
#include "spkc/neuron.hpp"
#include "spkc/tape.hpp"

namespace spkc {

enum class LayerKind { kLinear, kPconv, kDconv1d, kDconv2dHeads, kAccumulate, kHadamard };

const char* layer_kind_name(LayerKind kind);

/// One synaptic layer as seen by a profiling pass.
struct LayerRecord {
  std::string name;
  LayerKind kind = LayerKind::kLinear;
  // "conv" for convolution/linear layers, "mstasa" for attention-internal ops.
  std::string group;
  // Layers that consume the raw network input (the SEE PConv+DConv pair).
  bool input_stage = false;
  std::uint64_t flops = 0;
  // Effective input of the (fused) layer: nonzero count and size.
  std::uint64_t input_nonzero = 0;
  std::uint64_t input_elements = 0;
};

/// Receives one record per synaptic layer during an instrumented forward.
class LayerProbe {
 public:
  virtual ~LayerProbe() = default;
  virtual void record(const LayerRecord& rec) = 0;
  /// Sees every spike-function output ("spike", "attention_map") and the
  /// embedding's residual sum ("see.residual").
  virtual void observe(const char* /*what*/, const Tensor& /*t*/) {}
};

/// Everything a layer needs besides its weights.
struct ForwardContext {
  Tape* tape = nullptr;
  Mode mode = Mode::kEval;
  NeuronConfig neuron;
  double dropout_p = 0.0;
  std::mt19937_64* rng = nullptr;
  LayerProbe* probe = nullptr;
  // Profiling labels: owning module group and name prefix for ops that are
  // not layers themselves (attention sums and gates).
  std::string group = "conv";
  std::string scope;

  /// Tape leaf for `p` when recording, otherwise its plain value.
  Tensor param(Parameter& p) const { return tape ? tape->leaf(p) : p.value; }
  Tensor spike(const Tensor& x) const;
  /// Dropout on pre-spike activations; identity outside train mode.
  Tensor maybe_dropout(const Tensor& x) const;
  void note(std::string name, LayerKind kind, std::uint64_t flops, const Tensor& effective_input,
            bool input_stage = false) const;
};

std::uint64_t count_nonzero(const Tensor& t);

}  // namespace spkc
