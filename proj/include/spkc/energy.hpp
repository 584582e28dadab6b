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
#include <string>
#include <vector>

#include "spkc/context.hpp"
#include "spkc/data.hpp"
#include "spkc/model.hpp"

namespace spkc {

inline constexpr double kMacEnergyPj = 4.6;
inline constexpr double kAcEnergyPj = 0.9;

/// Nonzero count over element count; 0 for an empty tensor.
double measure_firing_rate(const Tensor& x);

/// Static description of one layer for FLOP counting.
struct LayerDescriptor {
  // linear, pconv, dconv1d, dconv2d, bn (folded), accumulate, hadamard
  std::string kind;
  std::size_t steps = 0;
  std::size_t batch = 0;
  std::size_t in_features = 0;
  std::size_t out_features = 0;
  std::size_t kernel = 0;
  std::size_t heads = 0;
  std::size_t head_dim = 0;
};

/// Dense MAC count: linear/pconv T*B*Din*Dout, dconv1d T*B*D*k, dconv2d
/// T*B*H*Dh*(k + H) (temporal taps plus the head mix), folded bn 0,
/// accumulate and hadamard T*B*Din. Throws ConfigError for an unknown kind.
std::uint64_t layer_flops(const LayerDescriptor& layer);

enum class OpKind { kMac, kAc };

struct LayerCost {
  std::string name;
  std::string kind;
  std::string group;
  std::uint64_t flops = 0;
  double input_firing_rate = 0.0;
  std::uint64_t sops = 0;
  OpKind op = OpKind::kAc;
};

struct EnergyReport {
  std::vector<LayerCost> layers;
  double e_mac_pj = kMacEnergyPj;
  double e_ac_pj = kAcEnergyPj;
  std::uint64_t mac_flops = 0;
  std::uint64_t sops_conv = 0;
  std::uint64_t sops_mstasa = 0;
  double total_mj = 0.0;
};

/// SOPs for `flops` dense operations at nonzero/elements input density,
/// rounded to the nearest integer.
std::uint64_t synaptic_ops(std::uint64_t flops, std::uint64_t nonzero, std::uint64_t elements);

/// (mac_flops * E_MAC + sops * E_AC) in millijoules.
double energy_from_totals(double mac_flops, double sops, double e_mac_pj = kMacEnergyPj,
                          double e_ac_pj = kAcEnergyPj);

/// Collects layer records of an instrumented forward into costs. Input-stage
/// layers are charged as MAC when `analog_input` is set.
class EnergyProfiler : public LayerProbe {
 public:
  explicit EnergyProfiler(bool analog_input) : analog_input_(analog_input) {}

  void record(const LayerRecord& rec) override;
  EnergyReport report() const;

 private:
  bool analog_input_;
  std::vector<LayerCost> layers_;
};

/// One instrumented forward on `probe`. The model must be in eval mode
/// with folded BN, otherwise ConfigError.
EnergyReport estimate_energy(SpikCommanderModel& model, const Batch& probe);

/// Fixed-width per-layer table plus totals.
std::string format_energy_text(const EnergyReport& report);
/// One JSON object per layer, one per line.
std::string format_energy_jsonl(const EnergyReport& report);

}  // namespace spkc
