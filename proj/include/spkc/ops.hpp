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
#include <span>
#include <utility>

#include "spkc/tape.hpp"
#include "spkc/tensor.hpp"

namespace spkc {

// Every op records itself on the tape of its recorded inputs (if any) and
// is otherwise a pure function of its arguments.

Tensor reshape(const Tensor& x, Shape shape);
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double s);

/// x[t, ...] * map[0, ...] for every t.
Tensor broadcast_time_mul(const Tensor& map, const Tensor& x);
/// Sum over axis 0, keeping it as size 1.
Tensor sum_time(const Tensor& x);
/// y[t] = sum of x[t-r .. t+r] along axis 0; steps outside [0, T) count as zero.
Tensor window_sum_time(const Tensor& x, std::size_t radius);
/// x[t, b, ...] * weights[t * B + b].
Tensor mul_time_batch(const Tensor& x, std::span<const double> weights);

std::pair<Tensor, Tensor> split_last(const Tensor& x, std::size_t at);
Tensor concat_last(const Tensor& a, const Tensor& b);

/// Channel mix along `axis`: y[o, j, r] = sum_i x[o, i, r] * w[i, j] + b[j].
/// `b` may be empty.
Tensor mix_channels(const Tensor& x, std::size_t axis, const Tensor& w, const Tensor& b);

/// out[..., :] = x[..., :] . weight + bias, weight is (Din, Dout).
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
/// Kernel-1 convolution over channels; identical to linear per time step.
Tensor conv1d_pointwise(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// Same-padded depthwise filter along time for x of shape (T, B, C) or
/// (T, B, C, R); kernel is (C, k) with k odd and shared over R.
Tensor depthwise_time(const Tensor& x, const Tensor& kernel, const Tensor& bias);
/// Depthwise 1D convolution of (T, B, D) with a (D, k) kernel.
Tensor conv1d_depthwise(const Tensor& x, const Tensor& kernel, const Tensor& bias);
/// Per-head temporal depthwise filter (kernel (H, k), unit extent over Dh)
/// followed by a pointwise (H, H) head mix. v is (T, B, H, Dh).
Tensor conv2d_depthwise_heads(const Tensor& v, const Tensor& kernel, const Tensor& kernel_bias,
                              const Tensor& mix, const Tensor& mix_bias);

/// Inverted dropout: kept entries are scaled by 1/(1-p).
Tensor dropout(const Tensor& x, double p, std::mt19937_64& rng);

Tensor softmax_last(const Tensor& x);
/// Scalar (shape {1}) sum of all elements.
Tensor sum_all(const Tensor& x);
/// Scalar sum of x[i] * weights[i].
Tensor dot_all(const Tensor& x, std::span<const double> weights);

}  // namespace spkc
