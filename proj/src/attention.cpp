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

#include "spkc/attention.hpp"

#include <cmath>

#include "spkc/errors.hpp"
#include "spkc/fold.hpp"
#include "spkc/ops.hpp"

namespace spkc {

void AttentionConfig::validate() const {
  if (heads_h == 0 || hidden_d == 0 || hidden_d % heads_h != 0) {
    throw ConfigError("attention: hidden size " + std::to_string(hidden_d) +
                      " is not divisible by head count " + std::to_string(heads_h));
  }
  if (window_radius_w < 1) throw ConfigError("attention: window radius must be >= 1");
  if (time_steps_t < 1) throw ConfigError("attention: time steps must be >= 1");
  if (2 * window_radius_w + 1 > 2 * time_steps_t) {
    throw ConfigError("attention: window 2w+1 = " + std::to_string(2 * window_radius_w + 1) +
                      " exceeds 2T = " + std::to_string(2 * time_steps_t));
  }
}

double AttentionConfig::beta_global() const {
  return 1.0 / std::sqrt(static_cast<double>(head_dim() * time_steps_t));
}

double AttentionConfig::beta_local() const {
  return 1.0 / std::sqrt(static_cast<double>(head_dim() * (2 * window_radius_w + 1)));
}

std::size_t AttentionConfig::default_window(std::size_t time_steps) {
  const auto w = static_cast<std::size_t>(std::lround(static_cast<double>(time_steps) / 5.0));
  return w < 1 ? 1 : w;
}

QkvSpikes qkv(const Tensor& x_s, ProjectionBlock& wq, ProjectionBlock& wk, ProjectionBlock& wv,
              const ForwardContext& ctx) {
  return {wq.forward(x_s, ctx), wk.forward(x_s, ctx), wv.forward(x_s, ctx)};
}

Tensor apply_temporal_mask(const Tensor& q_or_k, const TemporalMask& mask) {
  if (q_or_k.rank() < 2 || mask.steps() != q_or_k.dim(0) || mask.batch() != q_or_k.dim(1)) {
    throw DimensionError("temporal mask (" + std::to_string(mask.steps()) + "," +
                         std::to_string(mask.batch()) + ") does not match tensor " +
                         shape_str(q_or_k.shape()));
  }
  return mul_time_batch(q_or_k, mask.weights());
}

namespace {

void require_qkv_shapes(const Tensor& q, const Tensor& k, const Tensor& v) {
  if (q.rank() != 3 || q.shape() != k.shape() || q.shape() != v.shape()) {
    throw DimensionError("attention: Q/K/V shapes " + shape_str(q.shape()) + ", " +
                         shape_str(k.shape()) + ", " + shape_str(v.shape()));
  }
}

std::string scoped(const ForwardContext& ctx, const char* leaf) {
  return ctx.scope.empty() ? std::string(leaf) : ctx.scope + "." + leaf;
}

}  // namespace

Tensor global_scores(const Tensor& q, const Tensor& k, double beta, const ForwardContext& ctx) {
  ctx.note(scoped(ctx, "global.q_sum"), LayerKind::kAccumulate, q.numel(), q);
  ctx.note(scoped(ctx, "global.k_sum"), LayerKind::kAccumulate, k.numel(), k);
  return scale(add(sum_time(q), sum_time(k)), beta);
}

Tensor window_scores(const Tensor& q, const Tensor& k, std::size_t radius, double beta,
                     const ForwardContext& ctx) {
  const std::uint64_t width = 2 * radius + 1;
  ctx.note(scoped(ctx, "swa.q_window"), LayerKind::kAccumulate, q.numel() * width, q);
  ctx.note(scoped(ctx, "swa.k_window"), LayerKind::kAccumulate, k.numel() * width, k);
  return scale(add(window_sum_time(q, radius), window_sum_time(k, radius)), beta);
}

Tensor attention_map(const Tensor& scores, const ForwardContext& ctx) {
  Tensor map = spike_stateless(scores, ctx.neuron);
  if (ctx.probe) ctx.probe->observe("attention_map", map);
  return map;
}

Tensor stasa_global(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionConfig& cfg,
                    const ForwardContext& ctx) {
  require_qkv_shapes(q, k, v);
  if (v.dim(2) != cfg.hidden_d) throw DimensionError("stasa_global: channel count != hidden_d");
  Tensor map = attention_map(global_scores(q, k, cfg.beta_global(), ctx), ctx);
  ctx.note(scoped(ctx, "global.gate"), LayerKind::kHadamard, v.numel(), map);
  return broadcast_time_mul(map, v);
}

Tensor stasa_swa(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionConfig& cfg,
                 const ForwardContext& ctx) {
  require_qkv_shapes(q, k, v);
  if (v.dim(2) != cfg.hidden_d) throw DimensionError("stasa_swa: channel count != hidden_d");
  Tensor map = attention_map(window_scores(q, k, cfg.window_radius_w, cfg.beta_local(), ctx), ctx);
  ctx.note(scoped(ctx, "swa.gate"), LayerKind::kHadamard, v.numel(), map);
  return mul(map, v);
}

VBranch::VBranch(std::string n, std::size_t heads, std::mt19937_64& rng, std::size_t k)
    : name(std::move(n)),
      kernel(name + ".kernel", uniform_init({heads, k}, k, rng)),
      kernel_bias(name + ".kernel_bias", Tensor::zeros({heads}), false),
      mix(name + ".mix", uniform_init({heads, heads}, heads, rng)),
      mix_bias(name + ".mix_bias", Tensor::zeros({heads}), false),
      bn(name + ".bn", heads) {}

Tensor VBranch::forward(const Tensor& v_s, const ForwardContext& ctx) {
  if (v_s.rank() != 3) throw DimensionError("v_branch: expected (T,B,D)");
  const std::size_t steps = v_s.dim(0), batch = v_s.dim(1), d = v_s.dim(2);
  const std::size_t h = heads();
  if (d % h != 0) {
    throw DimensionError("v_branch: " + std::to_string(d) + " channels do not split into " +
                         std::to_string(h) + " heads");
  }
  const std::size_t k = kernel.value.dim(1);
  ctx.note(name, LayerKind::kDconv2dHeads, static_cast<std::uint64_t>(v_s.numel()) * (k + h), v_s);
  Tensor heads4 = reshape(v_s, {steps, batch, h, d / h});
  Tensor y = conv2d_depthwise_heads(heads4, ctx.param(kernel), ctx.param(kernel_bias),
                                    ctx.param(mix), ctx.param(mix_bias));
  if (!bn.folded) y = batchnorm(y, bn, ctx.param(bn.gamma), ctx.param(bn.beta));
  return reshape(ctx.spike(ctx.maybe_dropout(y)), {steps, batch, d});
}

void VBranch::parameters(std::vector<Parameter*>& out) {
  out.insert(out.end(), {&kernel, &kernel_bias, &mix, &mix_bias, &bn.gamma, &bn.beta});
}

void VBranch::norms(std::vector<BatchNormState*>& out) { out.push_back(&bn); }

void VBranch::fold() {
  auto f = fold_bn(mix.value, mix_bias.value, bn);
  mix.value = f.weight;
  mix_bias.value = f.bias;
  bn.folded = true;
}

Mstasa::Mstasa(std::string n, const AttentionConfig& c, std::mt19937_64& rng)
    : name(std::move(n)),
      cfg(c),
      wq(name + ".wq", c.hidden_d, c.hidden_d, ProjectionKind::kPconv, rng),
      wk(name + ".wk", c.hidden_d, c.hidden_d, ProjectionKind::kPconv, rng),
      wv(name + ".wv", c.hidden_d, c.hidden_d, ProjectionKind::kPconv, rng),
      vbranch(name + ".vbranch", c.heads_h, rng),
      wd(name + ".wd", c.hidden_d, c.hidden_d, ProjectionKind::kPconv, rng),
      wm(name + ".wm", c.hidden_d, c.hidden_d, ProjectionKind::kPconv, rng) {
  cfg.validate();
}

Tensor Mstasa::forward(const Tensor& x_s, const TemporalMask& mask, const ForwardContext& ctx,
                       Trace* trace) {
  ForwardContext c = ctx;
  c.group = "mstasa";
  c.scope = name;
  auto [q, k, v] = qkv(x_s, wq, wk, wv, c);
  const Tensor qm = apply_temporal_mask(q, mask);
  const Tensor km = apply_temporal_mask(k, mask);
  Tensor b1 = stasa_swa(qm, km, v, cfg, c);
  Tensor b2 = stasa_global(qm, km, v, cfg, c);
  Tensor b3 = vbranch.forward(v, c);
  Tensor fused = wd.forward(add(b1, b2), c);
  Tensor out = wm.forward(add(fused, b3), c);
  if (trace) *trace = Trace{q, k, v, b1, b2, b3, fused};
  return out;
}

void Mstasa::parameters(std::vector<Parameter*>& out) {
  wq.parameters(out);
  wk.parameters(out);
  wv.parameters(out);
  vbranch.parameters(out);
  wd.parameters(out);
  wm.parameters(out);
}

void Mstasa::norms(std::vector<BatchNormState*>& out) {
  wq.norms(out);
  wk.norms(out);
  wv.norms(out);
  vbranch.norms(out);
  wd.norms(out);
  wm.norms(out);
}

void Mstasa::fold() {
  wq.fold();
  wk.fold();
  wv.fold();
  vbranch.fold();
  wd.fold();
  wm.fold();
}

}  // namespace spkc
