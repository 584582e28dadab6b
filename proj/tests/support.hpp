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

// Shared helpers for the unit and acceptance tests: random inputs, a
// central-difference gradient checker and brute-force reference
// implementations written independently of the library kernels.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "spkc/attention.hpp"
#include "spkc/neuron.hpp"
#include "spkc/tape.hpp"
#include "spkc/tensor.hpp"

namespace spkc::testing {

inline Tensor random_uniform(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = u(rng);
  return Tensor(std::move(shape), std::move(v));
}

inline Tensor random_binary(Shape shape, std::mt19937_64& rng, double p = 0.5) {
  std::bernoulli_distribution b(p);
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = b(rng) ? 1.0 : 0.0;
  return Tensor(std::move(shape), std::move(v));
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline bool bit_equal(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && a.to_vector() == b.to_vector();
}

/// |a - n| / max(|a|, |n|, floor).
inline double rel_error(double analytic, double numeric, double floor = 1e-6) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

using ScalarFn = std::function<Tensor(const std::vector<Tensor>&)>;

/// Largest relative error between tape gradients of f and central
/// differences with step h, over every element of every input.
inline double grad_check(const ScalarFn& f, const std::vector<Tensor>& inputs, double h = 1e-4) {
  Tape tape;
  std::vector<Tensor> vars;
  for (const auto& x : inputs) vars.push_back(tape.variable(x));
  tape.backward(f(vars));
  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const auto g = tape.grad(vars[k]);
    for (std::size_t i = 0; i < inputs[k].numel(); ++i) {
      auto shifted = [&](double d) {
        std::vector<Tensor> in = inputs;
        auto v = in[k].to_vector();
        v[i] += d;
        in[k] = Tensor(in[k].shape(), std::move(v));
        return f(in)[0];
      };
      const double numeric = (shifted(h) - shifted(-h)) / (2.0 * h);
      worst = std::max(worst, rel_error(g[i], numeric));
    }
  }
  return worst;
}

/// The LIF update written out directly, one step.
struct LifOracle {
  double h, s, v;
};

inline LifOracle lif_oracle(double v, double x, double tau, double v_th, double v_reset) {
  const double h = v - (1.0 / tau) * (v - v_reset) + x;
  const double s = h - v_th >= 0.0 ? 1.0 : 0.0;
  return {h, s, h * (1.0 - s) + v_reset * s};
}

inline Tensor lif_sequence_oracle(const Tensor& x, const LifParams& p) {
  const std::size_t t_steps = x.dim(0), row = x.numel() / t_steps;
  std::vector<double> v(row, p.v_reset), out(x.numel());
  for (std::size_t t = 0; t < t_steps; ++t) {
    for (std::size_t i = 0; i < row; ++i) {
      auto r = lif_oracle(v[i], x[t * row + i], p.tau, p.v_th, p.v_reset);
      out[t * row + i] = r.s;
      v[i] = r.v;
    }
  }
  return Tensor(x.shape(), out);
}

/// Single-step neuron from rest, elementwise.
inline double stateless_spike(double x, const LifParams& p) {
  return lif_oracle(p.v_reset, x, p.tau, p.v_th, p.v_reset).s;
}

/// Naive global attention: loops over every (b, c) and sums Q', K' over time.
inline Tensor global_attention_oracle(const Tensor& q, const Tensor& k, const Tensor& v,
                                      const AttentionConfig& cfg, const LifParams& p = {}) {
  const std::size_t T = q.dim(0), B = q.dim(1), D = q.dim(2);
  const double dh = static_cast<double>(cfg.hidden_d / cfg.heads_h);
  const double beta = 1.0 / std::sqrt(dh * static_cast<double>(cfg.time_steps_t));
  std::vector<double> out(T * B * D);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t c = 0; c < D; ++c) {
      double qs = 0.0, ks = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        qs += q[(t * B + b) * D + c];
        ks += k[(t * B + b) * D + c];
      }
      const double m = stateless_spike(beta * (qs + ks), p);
      for (std::size_t t = 0; t < T; ++t) out[(t * B + b) * D + c] = m * v[(t * B + b) * D + c];
    }
  }
  return Tensor(q.shape(), out);
}

/// Naive sliding-window attention: explicit zero-padded unfold per step.
inline Tensor swa_attention_oracle(const Tensor& q, const Tensor& k, const Tensor& v,
                                   const AttentionConfig& cfg, const LifParams& p = {},
                                   double beta_override = 0.0) {
  const std::size_t T = q.dim(0), B = q.dim(1), D = q.dim(2), w = cfg.window_radius_w;
  const double dh = static_cast<double>(cfg.hidden_d / cfg.heads_h);
  const double beta = beta_override > 0.0
                          ? beta_override
                          : 1.0 / std::sqrt(dh * static_cast<double>(2 * w + 1));
  std::vector<double> qp((T + 2 * w) * B * D, 0.0), kp(qp.size(), 0.0);
  for (std::size_t i = 0; i < T * B * D; ++i) {
    qp[w * B * D + i] = q[i];
    kp[w * B * D + i] = k[i];
  }
  std::vector<double> out(T * B * D);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t c = 0; c < D; ++c) {
        double s = 0.0;
        for (std::size_t j = 0; j < 2 * w + 1; ++j) {
          s += qp[((t + j) * B + b) * D + c] + kp[((t + j) * B + b) * D + c];
        }
        const std::size_t i = (t * B + b) * D + c;
        out[i] = stateless_spike(beta * s, p) * v[i];
      }
    }
  }
  return Tensor(q.shape(), out);
}

}  // namespace spkc::testing
