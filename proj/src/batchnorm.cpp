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

#include "spkc/batchnorm.hpp"

#include <cmath>

#include "spkc/errors.hpp"

namespace spkc {

BatchNormState::BatchNormState(const std::string& name, std::size_t channels)
    : gamma(name + ".gamma", Tensor::full({channels}, 1.0), false),
      beta(name + ".beta", Tensor::zeros({channels}), false),
      running_mean(channels, 0.0),
      running_var(channels, 1.0) {}

void BatchNormState::init_running_stats() {
  running_mean.assign(channels(), 0.0);
  running_var.assign(channels(), 1.0);
  stats_ready = true;
}

std::vector<double> BatchNormState::eval_scale() const {
  std::vector<double> s(channels());
  auto g = gamma.value.data();
  for (std::size_t c = 0; c < s.size(); ++c) s[c] = g[c] / std::sqrt(running_var[c] + eps);
  return s;
}

std::vector<double> BatchNormState::eval_shift() const {
  std::vector<double> s(channels());
  auto g = gamma.value.data(), b = beta.value.data();
  for (std::size_t c = 0; c < s.size(); ++c)
    s[c] = b[c] - g[c] * running_mean[c] / std::sqrt(running_var[c] + eps);
  return s;
}

Tensor batchnorm(const Tensor& x, BatchNormState& state) {
  return batchnorm(x, state, state.gamma.value, state.beta.value);
}

Tensor batchnorm(const Tensor& x, BatchNormState& state, const Tensor& gamma, const Tensor& beta) {
  if (state.folded) return x;
  if (x.rank() < 3) {
    throw DimensionError("batchnorm: expected channels on axis 2, got " + shape_str(x.shape()));
  }
  const std::size_t chans = x.dim(2);
  if (chans != state.channels()) {
    throw DimensionError("batchnorm: axis 2 has " + std::to_string(chans) + " channels, state has " +
                         std::to_string(state.channels()));
  }
  const std::size_t outer = x.dim(0) * x.dim(1);
  const std::size_t inner = chans ? x.numel() / (outer * chans) : 0;
  const std::size_t count = outer * inner;
  auto dx = x.data(), dg = gamma.data(), dbeta = beta.data();
  auto idx = [chans, inner](std::size_t o, std::size_t c, std::size_t r) {
    return (o * chans + c) * inner + r;
  };
  std::vector<double> out(x.numel());

  if (state.mode == Mode::kEval) {
    if (!state.stats_ready) {
      throw ConfigError("batchnorm: eval mode before any running statistics were recorded");
    }
    std::vector<double> inv_std(chans);
    for (std::size_t c = 0; c < chans; ++c) inv_std[c] = 1.0 / std::sqrt(state.running_var[c] + state.eps);
    std::vector<double> mean = state.running_mean;
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t c = 0; c < chans; ++c)
        for (std::size_t r = 0; r < inner; ++r) {
          const auto i = idx(o, c, r);
          out[i] = dg[c] * (dx[i] - mean[c]) * inv_std[c] + dbeta[c];
        }
    Tape* tape = common_tape({&x, &gamma, &beta});
    if (!tape) return Tensor(x.shape(), std::move(out));
    return tape->record(
        x.shape(), std::move(out),
        [x, gamma, beta, mean, inv_std, outer, chans, inner, idx](Tape& tp,
                                                                   std::span<const double> gy) {
          auto dx = x.data(), dg = gamma.data();
          std::vector<double> gx(gy.size()), gg(chans, 0.0), gb(chans, 0.0);
          for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t c = 0; c < chans; ++c)
              for (std::size_t r = 0; r < inner; ++r) {
                const auto i = idx(o, c, r);
                gx[i] = gy[i] * dg[c] * inv_std[c];
                gg[c] += gy[i] * (dx[i] - mean[c]) * inv_std[c];
                gb[c] += gy[i];
              }
          tp.accumulate(x, gx);
          tp.accumulate(gamma, gg);
          tp.accumulate(beta, gb);
        });
  }

  if (count < 2) {
    throw ConfigError("batchnorm: train mode needs at least 2 samples per channel, got " +
                      std::to_string(count));
  }
  std::vector<double> mean(chans, 0.0), var(chans, 0.0), inv_std(chans);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t c = 0; c < chans; ++c)
      for (std::size_t r = 0; r < inner; ++r) mean[c] += dx[idx(o, c, r)];
  for (auto& m : mean) m /= static_cast<double>(count);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t c = 0; c < chans; ++c)
      for (std::size_t r = 0; r < inner; ++r) {
        const double d = dx[idx(o, c, r)] - mean[c];
        var[c] += d * d;
      }
  for (std::size_t c = 0; c < chans; ++c) {
    const double biased = var[c] / static_cast<double>(count);
    const double unbiased = var[c] / static_cast<double>(count - 1);
    inv_std[c] = 1.0 / std::sqrt(biased + state.eps);
    state.running_mean[c] = (1.0 - state.momentum) * state.running_mean[c] + state.momentum * mean[c];
    state.running_var[c] = (1.0 - state.momentum) * state.running_var[c] + state.momentum * unbiased;
  }
  state.stats_ready = true;

  std::vector<double> xhat(x.numel());
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t c = 0; c < chans; ++c)
      for (std::size_t r = 0; r < inner; ++r) {
        const auto i = idx(o, c, r);
        xhat[i] = (dx[i] - mean[c]) * inv_std[c];
        out[i] = dg[c] * xhat[i] + dbeta[c];
      }
  Tape* tape = common_tape({&x, &gamma, &beta});
  if (!tape) return Tensor(x.shape(), std::move(out));
  return tape->record(
      x.shape(), std::move(out),
      [x, gamma, beta, xhat = std::move(xhat), inv_std, outer, chans, inner, count, idx](
          Tape& tp, std::span<const double> gy) {
        auto dg = gamma.data();
        std::vector<double> gg(chans, 0.0), gb(chans, 0.0);
        for (std::size_t o = 0; o < outer; ++o)
          for (std::size_t c = 0; c < chans; ++c)
            for (std::size_t r = 0; r < inner; ++r) {
              const auto i = idx(o, c, r);
              gb[c] += gy[i];
              gg[c] += gy[i] * xhat[i];
            }
        if (x.recorded()) {
          const double n = static_cast<double>(count);
          std::vector<double> gx(gy.size());
          for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t c = 0; c < chans; ++c)
              for (std::size_t r = 0; r < inner; ++r) {
                const auto i = idx(o, c, r);
                gx[i] = dg[c] * inv_std[c] * (gy[i] - gb[c] / n - xhat[i] * gg[c] / n);
              }
          tp.accumulate(x, gx);
        }
        tp.accumulate(gamma, gg);
        tp.accumulate(beta, gb);
      });
}

}  // namespace spkc
