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

#include "spkc/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spkc/errors.hpp"

namespace spkc {
namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

void require_rank_at_least(const char* op, const Tensor& x, std::size_t r) {
  if (x.rank() < r) {
    throw DimensionError(std::string(op) + ": expected rank >= " + std::to_string(r) +
                         ", got shape " + shape_str(x.shape()));
  }
}

// Product of dims in [from, to).
std::size_t span_prod(const Shape& s, std::size_t from, std::size_t to) {
  std::size_t n = 1;
  for (std::size_t i = from; i < to; ++i) n *= s[i];
  return n;
}

}  // namespace

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: " + shape_str(x.shape()) + " -> " + shape_str(shape));
  }
  auto out = x.to_vector();
  Tape* tape = common_tape({&x});
  if (!tape) return Tensor(std::move(shape), std::move(out));
  return tape->record(std::move(shape), std::move(out),
                      [x](Tape& tp, std::span<const double> gy) { tp.accumulate(x, gy); });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  std::vector<double> out(a.numel());
  auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = da[i] + db[i];
  Tape* tape = common_tape({&a, &b});
  if (!tape) return Tensor(a.shape(), std::move(out));
  return tape->record(a.shape(), std::move(out), [a, b](Tape& tp, std::span<const double> gy) {
    tp.accumulate(a, gy);
    tp.accumulate(b, gy);
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  std::vector<double> out(a.numel());
  auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = da[i] * db[i];
  Tape* tape = common_tape({&a, &b});
  if (!tape) return Tensor(a.shape(), std::move(out));
  return tape->record(a.shape(), std::move(out), [a, b](Tape& tp, std::span<const double> gy) {
    std::vector<double> g(gy.size());
    auto da = a.data(), db = b.data();
    if (a.recorded()) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = gy[i] * db[i];
      tp.accumulate(a, g);
    }
    if (b.recorded()) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = gy[i] * da[i];
      tp.accumulate(b, g);
    }
  });
}

Tensor scale(const Tensor& x, double s) {
  std::vector<double> out(x.numel());
  auto dx = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * dx[i];
  Tape* tape = common_tape({&x});
  if (!tape) return Tensor(x.shape(), std::move(out));
  return tape->record(x.shape(), std::move(out), [x, s](Tape& tp, std::span<const double> gy) {
    std::vector<double> g(gy.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = s * gy[i];
    tp.accumulate(x, g);
  });
}

Tensor broadcast_time_mul(const Tensor& map, const Tensor& x) {
  require_rank_at_least("broadcast_time_mul", x, 1);
  if (map.rank() != x.rank() || map.dim(0) != 1 ||
      !std::equal(map.shape().begin() + 1, map.shape().end(), x.shape().begin() + 1)) {
    throw DimensionError("broadcast_time_mul: map " + shape_str(map.shape()) +
                         " does not broadcast over " + shape_str(x.shape()) + " along axis 0");
  }
  const std::size_t steps = x.dim(0);
  const std::size_t inner = map.numel();
  std::vector<double> out(x.numel());
  auto dm = map.data(), dx = x.data();
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t i = 0; i < inner; ++i) out[t * inner + i] = dm[i] * dx[t * inner + i];
  Tape* tape = common_tape({&map, &x});
  if (!tape) return Tensor(x.shape(), std::move(out));
  return tape->record(x.shape(), std::move(out),
                      [map, x, steps, inner](Tape& tp, std::span<const double> gy) {
                        auto dm = map.data(), dx = x.data();
                        if (map.recorded()) {
                          std::vector<double> gm(inner, 0.0);
                          for (std::size_t t = 0; t < steps; ++t)
                            for (std::size_t i = 0; i < inner; ++i)
                              gm[i] += gy[t * inner + i] * dx[t * inner + i];
                          tp.accumulate(map, gm);
                        }
                        if (x.recorded()) {
                          std::vector<double> gx(gy.size());
                          for (std::size_t t = 0; t < steps; ++t)
                            for (std::size_t i = 0; i < inner; ++i)
                              gx[t * inner + i] = gy[t * inner + i] * dm[i];
                          tp.accumulate(x, gx);
                        }
                      });
}

Tensor sum_time(const Tensor& x) {
  require_rank_at_least("sum_time", x, 1);
  const std::size_t steps = x.dim(0);
  const std::size_t inner = steps ? x.numel() / steps : 0;
  Shape shape = x.shape();
  shape[0] = 1;
  std::vector<double> out(inner, 0.0);
  auto dx = x.data();
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t i = 0; i < inner; ++i) out[i] += dx[t * inner + i];
  Tape* tape = common_tape({&x});
  if (!tape) return Tensor(std::move(shape), std::move(out));
  return tape->record(std::move(shape), std::move(out),
                      [x, steps, inner](Tape& tp, std::span<const double> gy) {
                        std::vector<double> gx(steps * inner);
                        for (std::size_t t = 0; t < steps; ++t)
                          std::copy(gy.begin(), gy.end(), gx.begin() + t * inner);
                        tp.accumulate(x, gx);
                      });
}

namespace {

// Centered window sum along axis 0 via a running sum. Symmetric, so it is
// also its own adjoint.
std::vector<double> window_sum_kernel(std::span<const double> x, std::size_t steps,
                                      std::size_t inner, std::size_t radius) {
  std::vector<double> out(steps * inner, 0.0);
  std::vector<double> acc(inner, 0.0);
  // Prime with x[0 .. radius-1]; each step adds the entering edge and
  // drops the leaving one.
  for (std::size_t t = 0; t < std::min(radius, steps); ++t)
    for (std::size_t i = 0; i < inner; ++i) acc[i] += x[t * inner + i];
  for (std::size_t t = 0; t < steps; ++t) {
    const std::size_t enter = t + radius;
    if (enter < steps)
      for (std::size_t i = 0; i < inner; ++i) acc[i] += x[enter * inner + i];
    if (t > radius) {
      const std::size_t leave = t - radius - 1;
      for (std::size_t i = 0; i < inner; ++i) acc[i] -= x[leave * inner + i];
    }
    std::copy(acc.begin(), acc.end(), out.begin() + t * inner);
  }
  return out;
}

}  // namespace

Tensor window_sum_time(const Tensor& x, std::size_t radius) {
  require_rank_at_least("window_sum_time", x, 1);
  const std::size_t steps = x.dim(0);
  const std::size_t inner = steps ? x.numel() / steps : 0;
  auto out = window_sum_kernel(x.data(), steps, inner, radius);
  Tape* tape = common_tape({&x});
  if (!tape) return Tensor(x.shape(), std::move(out));
  return tape->record(x.shape(), std::move(out),
                      [x, steps, inner, radius](Tape& tp, std::span<const double> gy) {
                        tp.accumulate(x, window_sum_kernel(gy, steps, inner, radius));
                      });
}

Tensor mul_time_batch(const Tensor& x, std::span<const double> weights) {
  require_rank_at_least("mul_time_batch", x, 2);
  const std::size_t tb = x.dim(0) * x.dim(1);
  if (weights.size() != tb) {
    throw DimensionError("mul_time_batch: " + std::to_string(weights.size()) +
                         " weights for (T,B) = (" + std::to_string(x.dim(0)) + "," +
                         std::to_string(x.dim(1)) + ")");
  }
  const std::size_t inner = tb ? x.numel() / tb : 0;
  std::vector<double> w(weights.begin(), weights.end());
  std::vector<double> out(x.numel());
  auto dx = x.data();
  for (std::size_t k = 0; k < tb; ++k)
    for (std::size_t i = 0; i < inner; ++i) out[k * inner + i] = dx[k * inner + i] * w[k];
  Tape* tape = common_tape({&x});
  if (!tape) return Tensor(x.shape(), std::move(out));
  return tape->record(x.shape(), std::move(out),
                      [x, w = std::move(w), tb, inner](Tape& tp, std::span<const double> gy) {
                        std::vector<double> gx(gy.size());
                        for (std::size_t k = 0; k < tb; ++k)
                          for (std::size_t i = 0; i < inner; ++i)
                            gx[k * inner + i] = gy[k * inner + i] * w[k];
                        tp.accumulate(x, gx);
                      });
}

std::pair<Tensor, Tensor> split_last(const Tensor& x, std::size_t at) {
  require_rank_at_least("split_last", x, 1);
  const std::size_t d = x.shape().back();
  if (at > d) throw DimensionError("split_last: split point beyond last axis");
  const std::size_t outer = d ? x.numel() / d : 0;
  const std::size_t d2 = d - at;
  Shape s1 = x.shape(), s2 = x.shape();
  s1.back() = at;
  s2.back() = d2;
  std::vector<double> a(outer * at), b(outer * d2);
  auto dx = x.data();
  for (std::size_t o = 0; o < outer; ++o) {
    std::copy_n(dx.begin() + o * d, at, a.begin() + o * at);
    std::copy_n(dx.begin() + o * d + at, d2, b.begin() + o * d2);
  }
  Tape* tape = common_tape({&x});
  if (!tape) return {Tensor(std::move(s1), std::move(a)), Tensor(std::move(s2), std::move(b))};
  auto left = tape->record(std::move(s1), std::move(a),
                           [x, outer, d, at](Tape& tp, std::span<const double> gy) {
                             std::vector<double> gx(outer * d, 0.0);
                             for (std::size_t o = 0; o < outer; ++o)
                               std::copy_n(gy.begin() + o * at, at, gx.begin() + o * d);
                             tp.accumulate(x, gx);
                           });
  auto right = tape->record(std::move(s2), std::move(b),
                            [x, outer, d, at, d2](Tape& tp, std::span<const double> gy) {
                              std::vector<double> gx(outer * d, 0.0);
                              for (std::size_t o = 0; o < outer; ++o)
                                std::copy_n(gy.begin() + o * d2, d2, gx.begin() + o * d + at);
                              tp.accumulate(x, gx);
                            });
  return {left, right};
}

Tensor concat_last(const Tensor& a, const Tensor& b) {
  require_rank_at_least("concat_last", a, 1);
  if (a.rank() != b.rank() ||
      !std::equal(a.shape().begin(), a.shape().end() - 1, b.shape().begin())) {
    throw DimensionError("concat_last: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  const std::size_t da = a.shape().back(), db = b.shape().back(), d = da + db;
  const std::size_t outer = da ? a.numel() / da : (db ? b.numel() / db : 0);
  Shape shape = a.shape();
  shape.back() = d;
  std::vector<double> out(outer * d);
  auto xa = a.data(), xb = b.data();
  for (std::size_t o = 0; o < outer; ++o) {
    std::copy_n(xa.begin() + o * da, da, out.begin() + o * d);
    std::copy_n(xb.begin() + o * db, db, out.begin() + o * d + da);
  }
  Tape* tape = common_tape({&a, &b});
  if (!tape) return Tensor(std::move(shape), std::move(out));
  return tape->record(std::move(shape), std::move(out),
                      [a, b, outer, da, db, d](Tape& tp, std::span<const double> gy) {
                        std::vector<double> ga(outer * da), gb(outer * db);
                        for (std::size_t o = 0; o < outer; ++o) {
                          std::copy_n(gy.begin() + o * d, da, ga.begin() + o * da);
                          std::copy_n(gy.begin() + o * d + da, db, gb.begin() + o * db);
                        }
                        tp.accumulate(a, ga);
                        tp.accumulate(b, gb);
                      });
}

Tensor mix_channels(const Tensor& x, std::size_t axis, const Tensor& w, const Tensor& b) {
  if (axis >= x.rank()) {
    throw DimensionError("mix_channels: axis " + std::to_string(axis) + " out of range for " +
                         shape_str(x.shape()));
  }
  if (w.rank() != 2) throw DimensionError("mix_channels: weight must be 2-D");
  const std::size_t cin = x.dim(axis);
  if (w.dim(0) != cin) {
    throw DimensionError("dimension mismatch on axis " + std::to_string(axis) + ": input has " +
                         std::to_string(cin) + " channels, weight expects " +
                         std::to_string(w.dim(0)));
  }
  const std::size_t cout = w.dim(1);
  if (!b.empty() && (b.rank() != 1 || b.dim(0) != cout)) {
    throw DimensionError("mix_channels: bias shape " + shape_str(b.shape()) +
                         " does not match output channels " + std::to_string(cout));
  }
  const std::size_t outer = span_prod(x.shape(), 0, axis);
  const std::size_t inner = span_prod(x.shape(), axis + 1, x.rank());
  Shape shape = x.shape();
  shape[axis] = cout;
  std::vector<double> out(outer * cout * inner, 0.0);
  auto dx = x.data(), dw = w.data(), db = b.data();
  for (std::size_t o = 0; o < outer; ++o) {
    double* y = out.data() + o * cout * inner;
    if (!b.empty())
      for (std::size_t j = 0; j < cout; ++j)
        for (std::size_t r = 0; r < inner; ++r) y[j * inner + r] = db[j];
    for (std::size_t i = 0; i < cin; ++i) {
      const double* xi = dx.data() + (o * cin + i) * inner;
      const double* wi = dw.data() + i * cout;
      if (inner == 1) {
        const double xv = xi[0];
        if (xv == 0.0) continue;
        for (std::size_t j = 0; j < cout; ++j) y[j] += xv * wi[j];
      } else {
        for (std::size_t j = 0; j < cout; ++j)
          for (std::size_t r = 0; r < inner; ++r) y[j * inner + r] += xi[r] * wi[j];
      }
    }
  }
  Tape* tape = common_tape({&x, &w, &b});
  if (!tape) return Tensor(std::move(shape), std::move(out));
  return tape->record(
      std::move(shape), std::move(out),
      [x, w, b, outer, cin, cout, inner](Tape& tp, std::span<const double> gy) {
        auto dx = x.data(), dw = w.data();
        if (x.recorded()) {
          std::vector<double> gx(outer * cin * inner, 0.0);
          for (std::size_t o = 0; o < outer; ++o) {
            const double* g = gy.data() + o * cout * inner;
            for (std::size_t i = 0; i < cin; ++i) {
              const double* wi = dw.data() + i * cout;
              double* gxi = gx.data() + (o * cin + i) * inner;
              for (std::size_t j = 0; j < cout; ++j)
                for (std::size_t r = 0; r < inner; ++r) gxi[r] += g[j * inner + r] * wi[j];
            }
          }
          tp.accumulate(x, gx);
        }
        if (w.recorded()) {
          std::vector<double> gw(cin * cout, 0.0);
          for (std::size_t o = 0; o < outer; ++o) {
            const double* g = gy.data() + o * cout * inner;
            for (std::size_t i = 0; i < cin; ++i) {
              const double* xi = dx.data() + (o * cin + i) * inner;
              double* gwi = gw.data() + i * cout;
              for (std::size_t r = 0; r < inner; ++r) {
                const double xv = xi[r];
                if (xv == 0.0) continue;
                for (std::size_t j = 0; j < cout; ++j) gwi[j] += xv * g[j * inner + r];
              }
            }
          }
          tp.accumulate(w, gw);
        }
        if (b.recorded()) {
          std::vector<double> gb(cout, 0.0);
          for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t j = 0; j < cout; ++j)
              for (std::size_t r = 0; r < inner; ++r) gb[j] += gy[(o * cout + j) * inner + r];
          tp.accumulate(b, gb);
        }
      });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_rank_at_least("linear", x, 1);
  return mix_channels(x, x.rank() - 1, weight, bias);
}

Tensor conv1d_pointwise(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  return linear(x, weight, bias);
}

Tensor depthwise_time(const Tensor& x, const Tensor& kernel, const Tensor& bias) {
  if (x.rank() != 3 && x.rank() != 4) {
    throw DimensionError("depthwise_time: expected (T,B,C) or (T,B,C,R), got " +
                         shape_str(x.shape()));
  }
  if (kernel.rank() != 2) throw DimensionError("depthwise_time: kernel must be (C, k)");
  const std::size_t steps = x.dim(0), batch = x.dim(1), chans = x.dim(2);
  const std::size_t inner = x.rank() == 4 ? x.dim(3) : 1;
  if (kernel.dim(0) != chans) {
    throw DimensionError("dimension mismatch on axis 2: input has " + std::to_string(chans) +
                         " channels, kernel has " + std::to_string(kernel.dim(0)));
  }
  const std::size_t k = kernel.dim(1);
  if (k % 2 == 0) throw ConfigError("depthwise kernel size must be odd, got " + std::to_string(k));
  if (!bias.empty() && (bias.rank() != 1 || bias.dim(0) != chans)) {
    throw DimensionError("depthwise_time: bias must have one entry per channel");
  }
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(k / 2);
  const std::size_t row = batch * chans * inner;  // elements per time step
  std::vector<double> out(x.numel(), 0.0);
  auto dx = x.data(), dk = kernel.data(), db = bias.data();
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t bb = 0; bb < batch; ++bb) {
      for (std::size_t c = 0; c < chans; ++c) {
        double* y = out.data() + t * row + (bb * chans + c) * inner;
        if (!bias.empty())
          for (std::size_t r = 0; r < inner; ++r) y[r] = db[c];
        for (std::size_t j = 0; j < k; ++j) {
          const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + j) - half;
          if (src < 0 || src >= static_cast<std::ptrdiff_t>(steps)) continue;
          const double kv = dk[c * k + j];
          const double* xs = dx.data() + static_cast<std::size_t>(src) * row + (bb * chans + c) * inner;
          for (std::size_t r = 0; r < inner; ++r) y[r] += xs[r] * kv;
        }
      }
    }
  }
  Tape* tape = common_tape({&x, &kernel, &bias});
  if (!tape) return Tensor(x.shape(), std::move(out));
  return tape->record(
      x.shape(), std::move(out),
      [x, kernel, bias, steps, batch, chans, inner, k, half, row](Tape& tp,
                                                                   std::span<const double> gy) {
        auto dx = x.data(), dk = kernel.data();
        std::vector<double> gx(x.recorded() ? x.numel() : 0, 0.0);
        std::vector<double> gk(kernel.recorded() ? kernel.numel() : 0, 0.0);
        std::vector<double> gb(bias.recorded() ? chans : 0, 0.0);
        for (std::size_t t = 0; t < steps; ++t) {
          for (std::size_t bb = 0; bb < batch; ++bb) {
            for (std::size_t c = 0; c < chans; ++c) {
              const double* g = gy.data() + t * row + (bb * chans + c) * inner;
              if (!gb.empty())
                for (std::size_t r = 0; r < inner; ++r) gb[c] += g[r];
              for (std::size_t j = 0; j < k; ++j) {
                const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + j) - half;
                if (src < 0 || src >= static_cast<std::ptrdiff_t>(steps)) continue;
                const std::size_t off = static_cast<std::size_t>(src) * row + (bb * chans + c) * inner;
                if (!gx.empty()) {
                  const double kv = dk[c * k + j];
                  for (std::size_t r = 0; r < inner; ++r) gx[off + r] += g[r] * kv;
                }
                if (!gk.empty()) {
                  double acc = 0.0;
                  for (std::size_t r = 0; r < inner; ++r) acc += g[r] * dx[off + r];
                  gk[c * k + j] += acc;
                }
              }
            }
          }
        }
        if (!gx.empty()) tp.accumulate(x, gx);
        if (!gk.empty()) tp.accumulate(kernel, gk);
        if (!gb.empty()) tp.accumulate(bias, gb);
      });
}

Tensor conv1d_depthwise(const Tensor& x, const Tensor& kernel, const Tensor& bias) {
  if (x.rank() != 3) {
    throw DimensionError("conv1d_depthwise: expected (T,B,D), got " + shape_str(x.shape()));
  }
  return depthwise_time(x, kernel, bias);
}

Tensor conv2d_depthwise_heads(const Tensor& v, const Tensor& kernel, const Tensor& kernel_bias,
                              const Tensor& mix, const Tensor& mix_bias) {
  if (v.rank() != 4) {
    throw DimensionError("conv2d_depthwise_heads: expected (T,B,H,Dh), got " +
                         shape_str(v.shape()));
  }
  if (kernel.rank() != 2 || kernel.dim(0) != v.dim(2) || mix.rank() != 2 ||
      mix.dim(0) != v.dim(2) || mix.dim(1) != v.dim(2)) {
    throw DimensionError("conv2d_depthwise_heads: head count " + std::to_string(v.dim(2)) +
                         " does not match kernel " + shape_str(kernel.shape()) + " / mix " +
                         shape_str(mix.shape()));
  }
  return mix_channels(depthwise_time(v, kernel, kernel_bias), 2, mix, mix_bias);
}

Tensor dropout(const Tensor& x, double p, std::mt19937_64& rng) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout probability must be in [0, 1)");
  if (p == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - p);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> m(x.numel());
  for (auto& v : m) v = uni(rng) < p ? 0.0 : keep_scale;
  std::vector<double> out(x.numel());
  auto dx = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = dx[i] * m[i];
  Tape* tape = common_tape({&x});
  if (!tape) return Tensor(x.shape(), std::move(out));
  return tape->record(x.shape(), std::move(out),
                      [x, m = std::move(m)](Tape& tp, std::span<const double> gy) {
                        std::vector<double> gx(gy.size());
                        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = gy[i] * m[i];
                        tp.accumulate(x, gx);
                      });
}

Tensor softmax_last(const Tensor& x) {
  require_rank_at_least("softmax_last", x, 1);
  const std::size_t d = x.shape().back();
  const std::size_t outer = d ? x.numel() / d : 0;
  std::vector<double> out(x.numel());
  auto dx = x.data();
  for (std::size_t o = 0; o < outer; ++o) {
    const double* xi = dx.data() + o * d;
    double* yi = out.data() + o * d;
    const double mx = *std::max_element(xi, xi + d);
    double z = 0.0;
    for (std::size_t j = 0; j < d; ++j) z += (yi[j] = std::exp(xi[j] - mx));
    for (std::size_t j = 0; j < d; ++j) yi[j] /= z;
  }
  Tape* tape = common_tape({&x});
  if (!tape) return Tensor(x.shape(), std::move(out));
  Tensor y(x.shape(), out);
  return tape->record(x.shape(), std::move(out),
                      [x, y, outer, d](Tape& tp, std::span<const double> gy) {
                        auto dy = y.data();
                        std::vector<double> gx(gy.size());
                        for (std::size_t o = 0; o < outer; ++o) {
                          double dotp = 0.0;
                          for (std::size_t j = 0; j < d; ++j) dotp += gy[o * d + j] * dy[o * d + j];
                          for (std::size_t j = 0; j < d; ++j)
                            gx[o * d + j] = dy[o * d + j] * (gy[o * d + j] - dotp);
                        }
                        tp.accumulate(x, gx);
                      });
}

Tensor sum_all(const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  Tape* tape = common_tape({&x});
  if (!tape) return Tensor({1}, {s});
  return tape->record({1}, {s}, [x](Tape& tp, std::span<const double> gy) {
    tp.accumulate(x, std::vector<double>(x.numel(), gy[0]));
  });
}

Tensor dot_all(const Tensor& x, std::span<const double> weights) {
  if (weights.size() != x.numel()) throw DimensionError("dot_all: weight count mismatch");
  std::vector<double> w(weights.begin(), weights.end());
  double s = 0.0;
  auto dx = x.data();
  for (std::size_t i = 0; i < w.size(); ++i) s += dx[i] * w[i];
  Tape* tape = common_tape({&x});
  if (!tape) return Tensor({1}, {s});
  return tape->record({1}, {s}, [x, w = std::move(w)](Tape& tp, std::span<const double> gy) {
    std::vector<double> gx(w.size());
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = gy[0] * w[i];
    tp.accumulate(x, gx);
  });
}

}  // namespace spkc
