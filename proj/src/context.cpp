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

#include "spkc/context.hpp"

#include "spkc/errors.hpp"
#include "spkc/ops.hpp"

namespace spkc {

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kLinear: return "linear";
    case LayerKind::kPconv: return "pconv";
    case LayerKind::kDconv1d: return "dconv1d";
    case LayerKind::kDconv2dHeads: return "dconv2d";
    case LayerKind::kAccumulate: return "accumulate";
    case LayerKind::kHadamard: return "hadamard";
  }
  return "unknown";
}

Tensor ForwardContext::spike(const Tensor& x) const {
  Tensor s = spike_sequence(x, neuron);
  if (probe) probe->observe("spike", s);
  return s;
}

std::uint64_t count_nonzero(const Tensor& t) {
  std::uint64_t n = 0;
  for (double v : t.data()) n += v != 0.0;
  return n;
}

Tensor ForwardContext::maybe_dropout(const Tensor& x) const {
  if (mode != Mode::kTrain || dropout_p <= 0.0) return x;
  if (!rng) throw ContractError("dropout in train mode needs an rng");
  return dropout(x, dropout_p, *rng);
}

void ForwardContext::note(std::string name, LayerKind kind, std::uint64_t flops,
                          const Tensor& effective_input, bool input_stage) const {
  if (!probe) return;
  LayerRecord rec;
  rec.name = std::move(name);
  rec.kind = kind;
  rec.group = group;
  rec.input_stage = input_stage;
  rec.flops = flops;
  rec.input_nonzero = count_nonzero(effective_input);
  rec.input_elements = effective_input.numel();
  probe->record(rec);
}

}  // namespace spkc
