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

#include <random>
#include <string>
#include <vector>

#include "spkc/context.hpp"
#include "spkc/layers.hpp"
#include "spkc/mask.hpp"

namespace spkc {

struct AttentionConfig {
  std::size_t hidden_d = 128;
  std::size_t heads_h = 8;
  std::size_t window_radius_w = 20;
  // Configured (padded) sequence length; the scaling factors use this value.
  std::size_t time_steps_t = 100;

  /// D % H == 0, w >= 1, 2w + 1 <= 2T.
  void validate() const;
  std::size_t head_dim() const { return hidden_d / heads_h; }
  /// 1 / sqrt(D_h * T).
  double beta_global() const;
  /// 1 / sqrt(D_h * (2w + 1)).
  double beta_local() const;

  /// round(T / 5), at least 1.
  static std::size_t default_window(std::size_t time_steps);
};

struct QkvSpikes {
  Tensor q, k, v;
};

/// Three independent PConv-BN-SN projections of the same input.
QkvSpikes qkv(const Tensor& x_s, ProjectionBlock& wq, ProjectionBlock& wk, ProjectionBlock& wv,
              const ForwardContext& ctx);

/// Zeroes every entry at mask-invalid (t, b). Applied to queries and keys only.
Tensor apply_temporal_mask(const Tensor& q_or_k, const TemporalMask& mask);

/// beta * (sum_t Q' + sum_t K'), shape (1, B, D).
Tensor global_scores(const Tensor& q, const Tensor& k, double beta, const ForwardContext& ctx = {});
/// beta * (window sums of Q' + K' over [t-w, t+w]), shape (T, B, D).
Tensor window_scores(const Tensor& q, const Tensor& k, std::size_t radius, double beta,
                     const ForwardContext& ctx = {});
/// SN(scores) with each element an independent single-step neuron.
Tensor attention_map(const Tensor& scores, const ForwardContext& ctx = {});

/// Long-range branch: one attention vector per (sample, channel) broadcast
/// over time and gating V.
Tensor stasa_global(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionConfig& cfg,
                    const ForwardContext& ctx = {});
/// Sliding-window branch: per-step attention map gating V.
Tensor stasa_swa(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionConfig& cfg,
                 const ForwardContext& ctx = {});

/// Convolutional value branch: per-head temporal depthwise (k = 9) filter,
/// pointwise head mix, BN over heads, SN.
struct VBranch {
  VBranch() = default;
  VBranch(std::string name, std::size_t heads, std::mt19937_64& rng, std::size_t k = 9);

  std::string name;
  Parameter kernel;      // (H, k)
  Parameter kernel_bias;  // (H)
  Parameter mix;          // (H, H)
  Parameter mix_bias;     // (H)
  BatchNormState bn;

  std::size_t heads() const { return mix.value.dim(0); }
  Tensor forward(const Tensor& v_s, const ForwardContext& ctx);

  void parameters(std::vector<Parameter*>& out);
  void norms(std::vector<BatchNormState*>& out);
  void fold();
};

/// Multi-view attention: shared Q/K/V, SWA + global + V-branch, fused by the
/// dual-attention (W_D) and multi-view (W_M) projection blocks.
struct Mstasa {
  Mstasa() = default;
  Mstasa(std::string name, const AttentionConfig& cfg, std::mt19937_64& rng);

  std::string name;
  AttentionConfig cfg;
  ProjectionBlock wq, wk, wv;
  VBranch vbranch;
  ProjectionBlock wd, wm;

  // Intermediate results of the last forward, filled when requested.
  struct Trace {
    Tensor q, k, v, b1, b2, b3, fused;
  };

  Tensor forward(const Tensor& x_s, const TemporalMask& mask, const ForwardContext& ctx,
                 Trace* trace = nullptr);

  void parameters(std::vector<Parameter*>& out);
  void norms(std::vector<BatchNormState*>& out);
  void fold();
};

}  // namespace spkc
