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

#include <utility>

#include "spkc/tensor.hpp"

namespace spkc {

/// LIF constants. Defaults: tau 2.0, threshold 1.0, reset 0.5.
struct LifParams {
  double tau = 2.0;
  double v_th = 1.0;
  double v_reset = 0.5;

  /// Throws ConfigError unless tau >= 1 and v_reset < v_th.
  void validate() const;
};

/// Sharpness of the arctangent surrogate derivative.
struct SurrogateParams {
  double alpha = 5.0;

  void validate() const;
};

/// How the threshold nonlinearity behaves.
enum class SpikeFn {
  // Heaviside forward, surrogate derivative backward, reset gate detached.
  kHeaviside,
  // Smooth arctangent step forward with its exact derivative everywhere.
  // Used to check the tape against finite differences.
  kSmoothTwin,
};

struct NeuronConfig {
  LifParams lif;
  SurrogateParams surrogate;
  SpikeFn fn = SpikeFn::kHeaviside;
};

/// Membrane potential carried between time steps.
struct LifState {
  Tensor v;

  static LifState at_rest(Shape shape, const LifParams& p);
};

/// Charge: H = v - (v - v_reset) / tau + x.
inline double lif_charge(double v, double x, const LifParams& p) {
  return v - (1.0 / p.tau) * (v - p.v_reset) + x;
}

/// One step of the LIF dynamics with hard reset; spikes where H >= v_th.
std::pair<SpikeTensor, LifState> lif_step(const Tensor& x_t, const LifState& state,
                                          const LifParams& p);

/// Folds lif_step over axis 0 starting from v_reset. Recorded on the tape of
/// x; backward runs BPTT with the surrogate derivative.
SpikeTensor lif_sequence(const Tensor& x, const LifParams& p, const SurrogateParams& sg = {});

/// Full per-step trace of lif_sequence, for inspection.
struct LifTrace {
  Tensor h;  // charged potential before the spike decision
  Tensor s;  // spikes
  Tensor v;  // potential after reset
};
LifTrace lif_trace(const Tensor& x, const LifParams& p);

/// The spike function SN(.) as used by the network layers; in
/// SpikeFn::kSmoothTwin mode the output is real-valued.
Tensor spike_sequence(const Tensor& x, const NeuronConfig& cfg);

/// SN(.) applied to every element as an independent single-step neuron
/// starting at v_reset (no state carried along axis 0).
Tensor spike_stateless(const Tensor& x, const NeuronConfig& cfg);

/// Arctangent surrogate derivative alpha / (2 (1 + (pi/2 alpha u)^2)).
double surrogate_grad(double u, const SurrogateParams& sg);

/// The smooth step whose derivative is surrogate_grad: atan(pi/2 alpha u)/pi + 1/2.
double smooth_spike(double u, const SurrogateParams& sg);

}  // namespace spkc
