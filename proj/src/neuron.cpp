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

#include "spkc/neuron.hpp"

#include <cmath>
#include <numbers>

#include "spkc/errors.hpp"
#include "spkc/ops.hpp"
#include "spkc/tape.hpp"

namespace spkc {

void LifParams::validate() const {
  if (!(tau >= 1.0)) throw ConfigError("LIF tau must be >= 1");
  if (!(v_reset < v_th)) throw ConfigError("LIF v_reset must be below v_th");
}

void SurrogateParams::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("surrogate alpha must be > 0");
}

LifState LifState::at_rest(Shape shape, const LifParams& p) {
  return {Tensor::full(std::move(shape), p.v_reset)};
}

double surrogate_grad(double u, const SurrogateParams& sg) {
  const double z = std::numbers::pi / 2.0 * sg.alpha * u;
  return sg.alpha / (2.0 * (1.0 + z * z));
}

double smooth_spike(double u, const SurrogateParams& sg) {
  return std::atan(std::numbers::pi / 2.0 * sg.alpha * u) / std::numbers::pi + 0.5;
}

std::pair<SpikeTensor, LifState> lif_step(const Tensor& x_t, const LifState& state,
                                          const LifParams& p) {
  if (x_t.shape() != state.v.shape()) {
    throw DimensionError("lif_step: input " + shape_str(x_t.shape()) + " vs state " +
                         shape_str(state.v.shape()));
  }
  auto dx = x_t.data(), dv = state.v.data();
  std::vector<double> s(dx.size()), v(dx.size());
  for (std::size_t i = 0; i < dx.size(); ++i) {
    const double h = lif_charge(dv[i], dx[i], p);
    s[i] = h >= p.v_th ? 1.0 : 0.0;
    v[i] = h * (1.0 - s[i]) + p.v_reset * s[i];
  }
  return {SpikeTensor::checked(Tensor(x_t.shape(), std::move(s))),
          LifState{Tensor(x_t.shape(), std::move(v))}};
}

namespace {

struct Unrolled {
  std::vector<double> h, s;
};

Unrolled unroll(const Tensor& x, const NeuronConfig& cfg, std::vector<double>* v_out = nullptr) {
  const auto& p = cfg.lif;
  const std::size_t steps = x.rank() ? x.dim(0) : 0;
  const std::size_t n = steps ? x.numel() / steps : 0;
  auto dx = x.data();
  Unrolled u{std::vector<double>(x.numel()), std::vector<double>(x.numel())};
  if (v_out) v_out->assign(x.numel(), 0.0);
  std::vector<double> v(n, p.v_reset);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = t * n + i;
      const double h = lif_charge(v[i], dx[k], p);
      const double s = cfg.fn == SpikeFn::kHeaviside ? (h >= p.v_th ? 1.0 : 0.0)
                                                     : smooth_spike(h - p.v_th, cfg.surrogate);
      v[i] = h * (1.0 - s) + p.v_reset * s;
      u.h[k] = h;
      u.s[k] = s;
      if (v_out) (*v_out)[k] = v[i];
    }
  }
  return u;
}

}  // namespace

Tensor spike_sequence(const Tensor& x, const NeuronConfig& cfg) {
  if (x.rank() < 1) throw DimensionError("spike_sequence: input needs a time axis");
  auto [h, s] = unroll(x, cfg);
  Tape* tape = common_tape({&x});
  if (!tape) return Tensor(x.shape(), std::move(s));
  const std::size_t steps = x.dim(0);
  const std::size_t n = steps ? x.numel() / steps : 0;
  std::vector<double> saved_s = s;
  return tape->record(
      x.shape(), std::move(s),
      [x, cfg, steps, n, h = std::move(h), s = std::move(saved_s)](Tape& tp,
                                                                    std::span<const double> gs) {
        const auto& p = cfg.lif;
        const double leak = 1.0 - 1.0 / p.tau;
        std::vector<double> gx(x.numel());
        // Gradient reaching V[t] from H[t+1].
        std::vector<double> gv(n, 0.0);
        for (std::size_t t = steps; t-- > 0;) {
          for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = t * n + i;
            const double u = h[k] - p.v_th;
            const double ds = surrogate_grad(u, cfg.surrogate);
            // dV/dH: reset gate treated as constant for real spikes, exact
            // for the smooth twin.
            double dv_dh = 1.0 - s[k];
            if (cfg.fn == SpikeFn::kSmoothTwin) dv_dh += (p.v_reset - h[k]) * ds;
            const double gh = gs[k] * ds + gv[i] * dv_dh;
            gx[k] = gh;
            gv[i] = gh * leak;
          }
        }
        tp.accumulate(x, gx);
      });
}

SpikeTensor lif_sequence(const Tensor& x, const LifParams& p, const SurrogateParams& sg) {
  return SpikeTensor::checked(spike_sequence(x, NeuronConfig{p, sg, SpikeFn::kHeaviside}));
}

LifTrace lif_trace(const Tensor& x, const LifParams& p) {
  std::vector<double> v;
  auto [h, s] = unroll(x, NeuronConfig{p, {}, SpikeFn::kHeaviside}, &v);
  return {Tensor(x.shape(), std::move(h)), Tensor(x.shape(), std::move(s)),
          Tensor(x.shape(), std::move(v))};
}

Tensor spike_stateless(const Tensor& x, const NeuronConfig& cfg) {
  const Shape shape = x.shape();
  return reshape(spike_sequence(reshape(x, {1, x.numel()}), cfg), shape);
}

}  // namespace spkc
