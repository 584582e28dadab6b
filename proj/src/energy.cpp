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

#include "spkc/energy.hpp"

#include <cstdio>

#include "json.hpp"
#include "spkc/errors.hpp"

namespace spkc {

double measure_firing_rate(const Tensor& x) {
  if (x.numel() == 0) return 0.0;
  return static_cast<double>(count_nonzero(x)) / static_cast<double>(x.numel());
}

std::uint64_t layer_flops(const LayerDescriptor& l) {
  const std::uint64_t rows = static_cast<std::uint64_t>(l.steps) * l.batch;
  if (l.kind == "linear" || l.kind == "pconv") return rows * l.in_features * l.out_features;
  if (l.kind == "dconv1d") return rows * l.in_features * l.kernel;
  if (l.kind == "dconv2d") return rows * l.heads * l.head_dim * (l.kernel + l.heads);
  if (l.kind == "bn") return 0;
  if (l.kind == "accumulate" || l.kind == "hadamard") return rows * l.in_features;
  throw ConfigError("unknown layer kind '" + l.kind + "'");
}

std::uint64_t synaptic_ops(std::uint64_t flops, std::uint64_t nonzero, std::uint64_t elements) {
  if (elements == 0) return 0;
  const unsigned __int128 num = static_cast<unsigned __int128>(flops) * nonzero;
  return static_cast<std::uint64_t>((2 * num + elements) / (2 * static_cast<unsigned __int128>(elements)));
}

double energy_from_totals(double mac_flops, double sops, double e_mac_pj, double e_ac_pj) {
  return (mac_flops * e_mac_pj + sops * e_ac_pj) * 1e-9;
}

void EnergyProfiler::record(const LayerRecord& rec) {
  LayerCost c;
  c.name = rec.name;
  c.kind = layer_kind_name(rec.kind);
  c.group = rec.group;
  c.flops = rec.flops;
  c.input_firing_rate = rec.input_elements
                            ? static_cast<double>(rec.input_nonzero) / rec.input_elements
                            : 0.0;
  if (rec.input_stage && analog_input_) {
    c.op = OpKind::kMac;
  } else {
    c.op = OpKind::kAc;
    c.sops = synaptic_ops(rec.flops, rec.input_nonzero, rec.input_elements);
  }
  layers_.push_back(std::move(c));
}

EnergyReport EnergyProfiler::report() const {
  EnergyReport r;
  r.layers = layers_;
  for (const auto& l : layers_) {
    if (l.op == OpKind::kMac) {
      r.mac_flops += l.flops;
    } else if (l.group == "mstasa") {
      r.sops_mstasa += l.sops;
    } else {
      r.sops_conv += l.sops;
    }
  }
  r.total_mj = energy_from_totals(static_cast<double>(r.mac_flops),
                                  static_cast<double>(r.sops_conv + r.sops_mstasa));
  return r;
}

EnergyReport estimate_energy(SpikCommanderModel& model, const Batch& probe) {
  if (model.mode() != Mode::kEval) throw ConfigError("energy profiling requires eval mode");
  if (!model.folded()) throw ConfigError("energy profiling requires folded BN layers");
  EnergyProfiler prof(model.config().input_kind == InputKind::kAnalog);
  ForwardOptions opts;
  opts.probe = &prof;
  model.forward(probe.x, probe.mask, opts);
  return prof.report();
}

std::string format_energy_text(const EnergyReport& r) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-36s %-10s %-7s %4s %14s %8s %14s\n", "layer", "kind", "group",
                "op", "flops", "fr", "sops");
  out += line;
  for (const auto& l : r.layers) {
    std::snprintf(line, sizeof line, "%-36s %-10s %-7s %4s %14llu %8.4f %14llu\n", l.name.c_str(),
                  l.kind.c_str(), l.group.c_str(), l.op == OpKind::kMac ? "mac" : "ac",
                  static_cast<unsigned long long>(l.flops), l.input_firing_rate,
                  static_cast<unsigned long long>(l.sops));
    out += line;
  }
  std::snprintf(line, sizeof line,
                "\nmac flops     %llu\nsops conv     %llu\nsops mstasa   %llu\n"
                "E_MAC %.1f pJ, E_AC %.1f pJ\ntotal energy  %.6g mJ\n",
                static_cast<unsigned long long>(r.mac_flops),
                static_cast<unsigned long long>(r.sops_conv),
                static_cast<unsigned long long>(r.sops_mstasa), r.e_mac_pj, r.e_ac_pj, r.total_mj);
  out += line;
  return out;
}

std::string format_energy_jsonl(const EnergyReport& r) {
  std::string out;
  for (const auto& l : r.layers) {
    nlohmann::ordered_json j;
    j["name"] = l.name;
    j["kind"] = l.kind;
    j["group"] = l.group;
    j["op"] = l.op == OpKind::kMac ? "mac" : "ac";
    j["flops"] = l.flops;
    j["input_firing_rate"] = l.input_firing_rate;
    j["sops"] = l.sops;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace spkc
