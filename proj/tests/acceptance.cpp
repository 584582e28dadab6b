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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "spkc/attention.hpp"
#include "spkc/energy.hpp"
#include "spkc/fold.hpp"
#include "spkc/kvdoc.hpp"
#include "spkc/ops.hpp"
#include "spkc/trainer.hpp"
#include "support.hpp"

using namespace spkc;
using namespace spkc::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

AttentionConfig att_cfg(std::size_t t, std::size_t d, std::size_t h, std::size_t w) {
  AttentionConfig c;
  c.hidden_d = d;
  c.heads_h = h;
  c.window_radius_w = w;
  c.time_steps_t = t;
  return c;
}

std::vector<std::size_t> iota_order(std::size_t n) {
  std::vector<std::size_t> o(n);
  for (std::size_t i = 0; i < n; ++i) o[i] = i;
  return o;
}

// Rows [0, steps) of a (T, B, D) tensor.
Tensor leading_steps(const Tensor& x, std::size_t steps) {
  const std::size_t row = x.numel() / x.dim(0);
  auto d = x.data();
  Shape s = x.shape();
  s[0] = steps;
  return Tensor(s, std::vector<double>(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(steps * row)));
}

// x extended along time with `extra` rows drawn from fill().
Tensor extend_steps(const Tensor& x, std::size_t extra, const std::function<double()>& fill) {
  auto v = x.to_vector();
  const std::size_t row = x.numel() / x.dim(0);
  for (std::size_t i = 0; i < extra * row; ++i) v.push_back(fill());
  Shape s = x.shape();
  s[0] += extra;
  return Tensor(s, std::move(v));
}

void scale_decay_params(std::vector<Parameter*>& params, double f) {
  for (auto* p : params) {
    if (!p->decay) continue;
    auto v = p->value.to_vector();
    for (auto& x : v) x *= f;
    p->assign(v);
  }
}

// 1. LIF dynamics against the update written out by hand.
Outcome lif_dynamics() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> vd(-1.0, 1.5), xd(-3.0, 3.0);
  const LifParams p;
  const std::size_t n = 10000;
  std::vector<double> v(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = vd(rng);
    x[i] = xd(rng);
  }
  auto [s, next] = lif_step(Tensor({n}, x), LifState{Tensor({n}, v)}, p);
  std::size_t mismatches = 0, reset_violations = 0, memory_violations = 0, fired = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto o = lif_oracle(v[i], x[i], p.tau, p.v_th, p.v_reset);
    const double si = s.tensor()[i], vi = next.v[i];
    if (si != o.s || vi != o.v) ++mismatches;
    if (si == 1.0) {
      ++fired;
      if (vi != p.v_reset) ++reset_violations;
    } else if (si != 0.0 || vi != o.h) {
      ++memory_violations;
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && reset_violations == 0 && memory_violations == 0 && fired > 0 && fired < n &&
              secs < 1.0,
          fmt("%zu pairs, %zu fired, mismatches %zu, reset violations %zu, memory violations %zu, %.3fs", n,
              fired, mismatches, reset_violations, memory_violations, secs)};
}

// 2. Both attention branches against loop-level oracles.
Outcome attention_oracles() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1002);
  std::size_t instances = 0, mismatches = 0, nonzero = 0;
  while (instances < 200) {
    const std::size_t T = 1 + rng() % 16, B = 1 + rng() % 2, H = 1 + rng() % 2;
    const std::size_t D = H * (1 + rng() % (8 / H)), w = 1 + rng() % 2;
    if (2 * w + 1 > 2 * T) continue;
    const auto cfg = att_cfg(T, D, H, w);
    const double p = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    const Tensor q = random_binary({T, B, D}, rng, p), k = random_binary({T, B, D}, rng, p),
                 v = random_binary({T, B, D}, rng);
    const Tensor g = stasa_global(q, k, v, cfg), s = stasa_swa(q, k, v, cfg);
    if (!bit_equal(g, global_attention_oracle(q, k, v, cfg))) ++mismatches;
    if (!bit_equal(s, swa_attention_oracle(q, k, v, cfg))) ++mismatches;
    nonzero += count_nonzero(g) + count_nonzero(s);
    ++instances;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && nonzero > 0 && secs < 10.0,
          fmt("%zu instances, %zu mismatching outputs, %zu output spikes, %.3fs", instances, mismatches, nonzero,
              secs)};
}

// 3. A window covering the whole sequence, scaled like the global branch,
// reproduces the global map at every step.
Outcome swa_reduces_to_global() {
  std::mt19937_64 rng(1003);
  std::size_t mismatches = 0, fired = 0, silent = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t T = 2 + rng() % 15, B = 1 + rng() % 2, H = 1 + rng() % 2, D = H * (1 + rng() % 4);
    const std::size_t w = T - 1 + rng() % 3;
    const auto cfg = att_cfg(T, D, H, std::min(w, T - 1));
    const double p = std::uniform_real_distribution<double>(0.05, 0.6)(rng);
    const Tensor q = random_binary({T, B, D}, rng, p), k = random_binary({T, B, D}, rng, p);
    const double beta = cfg.beta_global();
    const Tensor local = attention_map(window_scores(q, k, w, beta));
    const Tensor global = attention_map(global_scores(q, k, beta));
    const std::size_t row = B * D;
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t j = 0; j < row; ++j) {
        if (local[t * row + j] != global[j]) ++mismatches;
      }
    }
    for (double g : global.data()) (g == 1.0 ? fired : silent) += 1;
  }
  return {mismatches == 0 && fired > 0 && silent > 0,
          fmt("50 instances, %zu mismatching map entries (global map: %zu fire, %zu silent)", mismatches, fired,
              silent)};
}

// 4. Padding a batch from T=20 to T=30 with masked steps.
Outcome mask_invariance() {
  std::mt19937_64 rng(1004);
  const std::size_t T = 20, extra = 10, B = 4, D = 8, H = 2;
  const auto cfg = att_cfg(T, D, H, 4);
  std::vector<std::size_t> lengths(B);
  for (auto& l : lengths) l = 5 + rng() % 16;
  const TemporalMask m20 = TemporalMask::from_lengths(T, lengths), m30 = TemporalMask::from_lengths(T + extra, lengths);
  std::bernoulli_distribution coin(0.5);
  auto garbage = [&] { return coin(rng) ? 1.0 : 0.0; };

  std::size_t differing = 0, spikes = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor q = random_binary({T, B, D}, rng), k = random_binary({T, B, D}, rng), v = random_binary({T, B, D}, rng);
    // Whatever sits in the padded steps must not leak into valid steps.
    const Tensor q30 = extend_steps(q, extra, garbage), k30 = extend_steps(k, extra, garbage),
                 v30 = extend_steps(v, extra, garbage);
    const Tensor qm = apply_temporal_mask(q, m20), km = apply_temporal_mask(k, m20);
    const Tensor qm30 = apply_temporal_mask(q30, m30), km30 = apply_temporal_mask(k30, m30);
    const Tensor g20 = stasa_global(qm, km, v, cfg), g30 = stasa_global(qm30, km30, v30, cfg);
    const Tensor s20 = stasa_swa(qm, km, v, cfg), s30 = stasa_swa(qm30, km30, v30, cfg);
    if (!bit_equal(g20, leading_steps(g30, T))) ++differing;
    if (!bit_equal(s20, leading_steps(s30, T))) ++differing;
    spikes += count_nonzero(g20) + count_nonzero(s20);
  }

  // Full multi-view attention in eval mode on zero-padded input.
  Mstasa m("m", cfg, rng);
  std::vector<BatchNormState*> norms;
  m.norms(norms);
  for (auto* bn : norms) {
    bn->mode = Mode::kEval;
    bn->init_running_stats();
  }
  std::vector<Parameter*> params;
  m.parameters(params);
  scale_decay_params(params, 3.0);
  std::size_t fused_spikes = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> xv(T * B * D);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t c = 0; c < D; ++c) xv[(t * B + b) * D + c] = t < lengths[b] && coin(rng) ? 1.0 : 0.0;
      }
    }
    const Tensor x(Shape{T, B, D}, xv);
    const Tensor x30 = extend_steps(x, extra, [] { return 0.0; });
    const Tensor y20 = m.forward(x, m20, ForwardContext{}), y30 = m.forward(x30, m30, ForwardContext{});
    if (!bit_equal(y20, leading_steps(y30, T))) ++differing;
    fused_spikes += count_nonzero(y20);
  }
  return {differing == 0 && spikes > 0 && fused_spikes > 0,
          fmt("%zu differing outputs over 40 branch and 20 fused comparisons (%zu branch, %zu fused spikes)",
              differing, spikes, fused_spikes)};
}

// 5. Tape gradients of the smooth twin against central differences.
Outcome gradient_check() {
  const auto t0 = Clock::now();
  ModelConfig c;
  c.heads = 2;
  c.hidden = 4;
  c.input_neurons = 3;
  c.time_steps = 10;
  c.window_radius = 2;
  c.expansion = 2;
  c.classes = 2;
  c.dropout = 0.0;
  SpikCommanderModel model(c);
  auto params = model.parameters();
  const std::size_t count = model.parameter_count();

  std::mt19937_64 rng(1005);
  const std::size_t B = 8;
  const Tensor x = random_binary({c.time_steps, B, c.input_neurons}, rng, 0.5);
  std::vector<std::size_t> lengths(B), labels(B);
  for (std::size_t b = 0; b < B; ++b) {
    lengths[b] = 6 + rng() % 5;
    labels[b] = b % 2;
  }
  const TemporalMask mask = TemporalMask::from_lengths(c.time_steps, lengths);
  // Move biases and BN affine terms off their initial 0 / 1 so every
  // parameter takes part; weights keep their initialization scale.
  for (auto* p : params) {
    auto v = p->value.to_vector();
    for (auto& x : v) x += std::uniform_real_distribution<double>(-0.2, 0.2)(rng);
    p->assign(v);
  }
  // BN runs on (random) running statistics. With batch statistics the
  // smooth twin of a steep LIF cascade varies on scales near 1e-4 itself,
  // which a central difference of that step cannot resolve.
  model.set_mode(Mode::kEval);
  for (auto* bn : model.norms()) {
    bn->init_running_stats();
    bn->running_mean = random_uniform({bn->channels()}, rng, -0.5, 0.5).to_vector();
    bn->running_var = random_uniform({bn->channels()}, rng, 0.5, 2.0).to_vector();
  }

  auto loss = [&](Tape* tape) {
    ForwardOptions fo;
    fo.tape = tape;
    fo.spike_fn = SpikeFn::kSmoothTwin;
    const auto cls = classify(model.forward(x, mask, fo), &mask);
    return cross_entropy_loss(cls.accumulated, labels);
  };
  for (auto* p : params) p->zero_grad();
  Tape tape;
  tape.backward(loss(&tape));

  const double h = 1e-4;
  double worst = 0.0, worst_analytic = 0.0, worst_numeric = 0.0;
  std::string worst_name;
  for (auto* p : params) {
    const auto base = p->value.to_vector();
    for (std::size_t i = 0; i < base.size(); ++i) {
      auto shifted = base;
      shifted[i] = base[i] + h;
      p->assign(shifted);
      const double up = loss(nullptr)[0];
      shifted[i] = base[i] - h;
      p->assign(shifted);
      const double down = loss(nullptr)[0];
      p->assign(base);
      const double numeric = (up - down) / (2.0 * h);
      const double e = rel_error(p->grad[i], numeric);
      if (e > worst) {
        worst = e;
        worst_analytic = p->grad[i];
        worst_numeric = numeric;
        worst_name = p->name + "[" + std::to_string(i) + "]";
      }
    }
  }
  const double secs = seconds_since(t0);
  return {count <= 1000 && worst < 1e-4 && secs < 60.0,
          fmt("%zu parameters, max relative error %.3e at %s (tape %.6e, fd %.6e), %.2fs", count, worst,
              worst_name.c_str(), worst_analytic, worst_numeric, secs)};
}

struct BinarityProbe : LayerProbe {
  std::size_t tensors = 0, bad_spikes = 0, bad_residual = 0, residuals = 0, twos = 0;
  void record(const LayerRecord&) override {}
  void observe(const char* what, const Tensor& t) override {
    if (std::string(what) == "see.residual") {
      ++residuals;
      for (double v : t.data()) {
        if (v == 2.0) ++twos;
        if (!(v == 0.0 || v == 1.0 || v == 2.0)) ++bad_residual;
      }
    } else {
      ++tensors;
      if (!is_binary(t)) ++bad_spikes;
    }
  }
};

// 6. Binary spikes everywhere under random end-to-end forwards.
Outcome binarity_fuzz() {
  std::mt19937_64 rng(1006);
  BinarityProbe probe;
  const std::size_t forwards = 1000;
  std::vector<SpikCommanderModel> models;
  for (std::size_t blocks : {1, 2}) {
    ModelConfig c;
    c.blocks = blocks;
    c.heads = 2;
    c.hidden = 8;
    c.input_neurons = 6;
    c.time_steps = 12;
    c.window_radius = 3;
    c.expansion = 2;
    c.classes = 3;
    c.init_seed = 7 + blocks;
    models.emplace_back(c);
    auto params = models.back().parameters();
    scale_decay_params(params, 2.0);
  }
  for (std::size_t i = 0; i < forwards; ++i) {
    auto& m = models[i % 2];
    m.set_mode(i % 3 == 0 ? Mode::kEval : Mode::kTrain);
    if (m.mode() == Mode::kEval) m.init_running_stats();
    const std::size_t T = 4 + rng() % 12, B = 1 + rng() % 3;
    std::vector<std::size_t> lengths(B);
    for (auto& l : lengths) l = 1 + rng() % T;
    const double p = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    ForwardOptions fo;
    fo.probe = &probe;
    fo.rng = &rng;
    m.forward(random_binary({T, B, 6}, rng, p), TemporalMask::from_lengths(T, lengths), fo);
  }
  return {probe.bad_spikes == 0 && probe.bad_residual == 0 && probe.residuals == forwards && probe.twos > 0,
          fmt("%zu forwards, %zu spike tensors (%zu non-binary), residual outputs %zu (%zu outside {0,1,2}, %zu "
              "twos)",
              forwards, probe.tensors, probe.bad_spikes, probe.residuals, probe.bad_residual, probe.twos)};
}

struct AccumulateCounter : LayerProbe {
  std::uint64_t ops = 0;
  void record(const LayerRecord& r) override {
    if (r.kind == LayerKind::kAccumulate) ops += r.flops;
  }
};

// 7. Global branch accumulate count grows linearly with T.
Outcome linear_complexity() {
  std::mt19937_64 rng(1007);
  auto ops = [&](std::size_t T) {
    const auto cfg = att_cfg(T, 16, 4, 4);
    AccumulateCounter probe;
    ForwardContext ctx;
    ctx.probe = &probe;
    stasa_global(random_binary({T, 2, 16}, rng), random_binary({T, 2, 16}, rng), random_binary({T, 2, 16}, rng), cfg,
                 ctx);
    return static_cast<double>(probe.ops);
  };
  const double o64 = ops(64), o128 = ops(128), o256 = ops(256);
  const double r1 = o128 / o64, r2 = o256 / o128;
  auto ok = [](double r) { return r >= 1.9 && r <= 2.1; };
  return {ok(r1) && ok(r2), fmt("ops(64)=%.0f ops(128)=%.0f ops(256)=%.0f, ratios %.4f %.4f", o64, o128, o256, r1, r2)};
}

// 8. Energy accounting.
Outcome energy_accounting() {
  std::mt19937_64 rng(1008);
  // (a) toy networks against a brute-force accumulate counter.
  std::size_t toy_mismatch = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n_in = 2 + rng() % 8, n_mid = 2 + rng() % 8, n_out = 2 + rng() % 5;
    ProjectionBlock l1("l1", n_in, n_mid, ProjectionKind::kPconv, rng);
    ProjectionBlock l2("l2", n_mid, n_out, ProjectionKind::kLinear, rng);
    for (auto* b : {&l1, &l2}) {
      b->bn.mode = Mode::kEval;
      b->bn.init_running_stats();
      auto w = b->weight.value.to_vector();
      for (auto& x : w) x *= 4.0;
      b->weight.assign(w);
    }
    EnergyProfiler prof(false);
    ForwardContext ctx;
    ctx.probe = &prof;
    const double p = std::uniform_real_distribution<double>(0.05, 0.9)(rng);
    const Tensor x = random_binary({3 + rng() % 10, 1 + rng() % 3, n_in}, rng, p);
    const Tensor s1 = l1.forward(x, ctx);
    l2.forward(s1, ctx);
    std::uint64_t brute1 = 0, brute2 = 0;
    for (double v : x.data()) {
      if (v != 0.0) brute1 += n_mid;
    }
    for (double v : s1.data()) {
      if (v != 0.0) brute2 += n_out;
    }
    const auto r = prof.report();
    if (r.layers.size() != 2 || r.layers[0].sops != brute1 || r.layers[1].sops != brute2) ++toy_mismatch;
  }

  // (b) printed FLOPs and SOPs.
  const double mj = energy_from_totals(0.005e9, 0.020e9);
  const double rel = std::abs(mj - 0.042) / 0.042;

  // (c) firing rate 1.
  std::size_t fr1_mismatch = 0;
  std::uniform_int_distribution<std::uint64_t> big(1, std::uint64_t{1} << 60);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t f = big(rng), n = 1 + rng() % 100000;
    if (synaptic_ops(f, n, n) != f) ++fr1_mismatch;
  }
  std::size_t fr1_layers = 0;
  {
    ProjectionBlock l("l", 5, 7, ProjectionKind::kPconv, rng);
    DepthwiseBlock d("d", 5, 9, rng);
    VBranch vb("vb", 5, rng);
    for (auto* bn : {&l.bn, &d.bn, &vb.bn}) {
      bn->mode = Mode::kEval;
      bn->init_running_stats();
    }
    EnergyProfiler prof(false);
    ForwardContext ctx;
    ctx.probe = &prof;
    const Tensor ones = Tensor::full({6, 2, 5}, 1.0);
    l.forward(ones, ctx);
    d.forward(ones, ctx);
    vb.forward(ones, ctx);
    stasa_global(ones, ones, ones, att_cfg(6, 5, 5, 2), ctx);
    stasa_swa(ones, ones, ones, att_cfg(6, 5, 5, 2), ctx);
    for (const auto& layer : prof.report().layers) {
      ++fr1_layers;
      if (layer.input_firing_rate != 1.0 || layer.sops != layer.flops) ++fr1_mismatch;
    }
  }
  return {toy_mismatch == 0 && rel <= 0.05 && fr1_mismatch == 0 && fr1_layers > 0,
          fmt("(a) %zu/50 toy mismatches; (b) %.4f mJ vs 0.042 (%.2f%%); (c) %zu mismatches over 1000 counts and %zu "
              "layers",
              toy_mismatch, mj, 100.0 * rel, fr1_mismatch, fr1_layers)};
}

void randomize_bn(BatchNormState& bn, std::mt19937_64& rng) {
  const std::size_t c = bn.gamma.value.numel();
  bn.mode = Mode::kEval;
  bn.init_running_stats();
  bn.gamma.assign(random_uniform({c}, rng, 0.3, 2.5).to_vector());
  bn.beta.assign(random_uniform({c}, rng, -1.0, 1.0).to_vector());
  bn.running_mean = random_uniform({c}, rng, -2.0, 2.0).to_vector();
  bn.running_var = random_uniform({c}, rng, 0.05, 4.0).to_vector();
}

// 9. Folded BN reproduces the unfused eval outputs.
Outcome bn_folding() {
  std::mt19937_64 rng(1009);
  double worst = 0.0;
  std::size_t spike_mismatch = 0, spikes = 0;
  ForwardContext ctx;
  for (int i = 0; i < 100; ++i) {
    const std::size_t T = 3 + rng() % 10, B = 1 + rng() % 3;
    const double p = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    switch (i % 3) {
      case 0: {
        const std::size_t din = 1 + rng() % 12, dout = 1 + rng() % 12;
        ProjectionBlock l("l", din, dout, rng() % 2 ? ProjectionKind::kPconv : ProjectionKind::kLinear, rng);
        randomize_bn(l.bn, rng);
        const Tensor x = random_binary({T, B, din}, rng, p);
        const Tensor pre = l.preactivation(x, ctx), s = l.forward(x, ctx);
        l.fold();
        worst = std::max(worst, max_abs_diff(pre, l.preactivation(x, ctx)));
        spike_mismatch += !bit_equal(s, l.forward(x, ctx));
        spikes += count_nonzero(s);
        break;
      }
      case 1: {
        const std::size_t ch = 1 + rng() % 10, k = 3 + 2 * (rng() % 15);
        DepthwiseBlock l("d", ch, k, rng);
        randomize_bn(l.bn, rng);
        const Tensor x = random_binary({T, B, ch}, rng, p);
        const Tensor pre = batchnorm(conv1d_depthwise(x, l.kernel.value, l.bias.value), l.bn);
        const Tensor s = l.forward(x, ctx);
        l.fold();
        worst = std::max(worst, max_abs_diff(pre, conv1d_depthwise(x, l.kernel.value, l.bias.value)));
        spike_mismatch += !bit_equal(s, l.forward(x, ctx));
        spikes += count_nonzero(s);
        break;
      }
      default: {
        const std::size_t h = 1 + rng() % 4, dh = 1 + rng() % 4;
        VBranch l("vb", h, rng);
        randomize_bn(l.bn, rng);
        const Tensor x = random_binary({T, B, h * dh}, rng, p);
        auto pre_of = [&] {
          return conv2d_depthwise_heads(reshape(x, {T, B, h, dh}), l.kernel.value, l.kernel_bias.value, l.mix.value,
                                        l.mix_bias.value);
        };
        const Tensor pre = batchnorm(pre_of(), l.bn);
        const Tensor s = l.forward(x, ctx);
        l.fold();
        worst = std::max(worst, max_abs_diff(pre, pre_of()));
        spike_mismatch += !bit_equal(s, l.forward(x, ctx));
        spikes += count_nonzero(s);
        break;
      }
    }
  }
  return {worst < 1e-5 && spike_mismatch == 0,
          fmt("100 layers (projection, depthwise, V-branch), max abs error %.3e, %zu spike outputs differ (%zu spikes)",
              worst, spike_mismatch, spikes)};
}

// 10. Parameter counts of the reference configurations.
Outcome parameter_counts() {
  ModelConfig small = ModelConfig::preset("shd-1l-8-128");
  ModelConfig large = ModelConfig::preset("ssc-2l-16-256");
  small.input_neurons = large.input_neurons = 140;
  small.classes = 20;
  large.classes = 35;
  const double a = static_cast<double>(SpikCommanderModel(small).parameter_count());
  const double b = static_cast<double>(SpikCommanderModel(large).parameter_count());
  const double ea = std::abs(a / 0.19e6 - 1.0), eb = std::abs(b / 2.13e6 - 1.0);
  return {ea <= 0.03 && eb <= 0.03,
          fmt("1L-8-128: %.0f (%.2f%% off 0.19M), 2L-16-256: %.0f (%.2f%% off 2.13M)", a, 100 * ea, b, 100 * eb)};
}

// 11. Learning a synthetic two-class task, replayed for determinism.
Outcome learnability() {
  const auto t0 = Clock::now();
  SynthConfig sc;
  sc.classes = 2;
  sc.samples_per_class = 100;
  sc.time_steps = 50;
  sc.neurons = 16;
  const auto train_set = synth_dataset(sc, 312, 0);
  const auto held_out = synth_dataset(sc, 312, 1);
  SynthConfig vc = sc;
  vc.samples_per_class = 20;
  const auto validation = synth_dataset(vc, 312, 2);

  ModelConfig mc;
  mc.blocks = 1;
  mc.heads = 4;
  mc.hidden = 32;
  mc.input_neurons = 16;
  mc.time_steps = 50;
  mc.window_radius = AttentionConfig::default_window(50);
  mc.classes = 2;
  mc.init_seed = 312;
  TrainConfig tc;
  tc.seed = 312;
  tc.epochs = 20;
  tc.batch_size = 32;

  struct Run {
    std::vector<EpochMetrics> log;
    double train_acc = 0.0, held_acc = 0.0;
  };
  auto run = [&] {
    SpikCommanderModel m(mc);
    const TrainResult r = train(m, train_set, tc, TrainOptions{}, validation);
    return Run{r.log, evaluate(m, train_set, 64).accuracy, evaluate(m, held_out, 64).accuracy};
  };
  const Run a = run();
  const Run b = run();
  bool identical = a.log.size() == b.log.size();
  for (std::size_t i = 0; identical && i < a.log.size(); ++i) {
    // Wall-clock time is the one field that cannot replay.
    EpochMetrics x = a.log[i], y = b.log[i];
    x.wall_ms = y.wall_ms = 0.0;
    identical = metrics_json(x) == metrics_json(y);
  }
  identical = identical && a.train_acc == b.train_acc && a.held_acc == b.held_acc;
  const double secs = seconds_since(t0);
  return {a.train_acc >= 0.95 && a.held_acc >= 0.90 && identical && tc.epochs <= 200 && secs < 600.0,
          fmt("%zu epochs: train %.3f, held-out %.3f, replay %s, %.1fs for both runs", tc.epochs, a.train_acc,
              a.held_acc, identical ? "identical" : "DIFFERS", secs)};
}

// 12. Accumulated per-step softmax sums to the number of valid steps.
Outcome head_normalization() {
  std::mt19937_64 rng(1012);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t T = 1 + rng() % 30, B = 1 + rng() % 4, Y = 2 + rng() % 35;
    const Tensor scores = random_uniform({T, B, Y}, rng, -20.0, 20.0);
    const bool masked = i % 2 == 1;
    std::vector<std::size_t> lengths(B, T);
    if (masked) {
      for (auto& l : lengths) l = 1 + rng() % T;
    }
    const TemporalMask mask = TemporalMask::from_lengths(T, lengths);
    const auto c = classify(scores, masked ? &mask : nullptr);
    for (std::size_t b = 0; b < B; ++b) {
      double s = 0.0;
      for (std::size_t y = 0; y < Y; ++y) s += c.accumulated[b * Y + y];
      worst = std::max(worst, std::abs(s - static_cast<double>(lengths[b])));
    }
  }
  return {worst < 1e-6, fmt("200 score tensors (half masked), max |sum - valid steps| %.3e", worst)};
}

// 13. Event drop is a seeded subset operation; augmentation presets load.
Outcome augmentation() {
  std::mt19937_64 rng(1013);
  const std::uint16_t raw = 700;
  EventDataset ds;
  ds.raw_neurons = raw;
  for (int i = 0; i < 200; ++i) {
    EventSample s;
    s.duration_us = 1'000'000;
    s.label = static_cast<std::uint16_t>(i % 20);
    const std::size_t n = rng() % 400;
    for (std::size_t j = 0; j < n; ++j) {
      s.events.push_back({static_cast<std::uint32_t>(rng() % s.duration_us), static_cast<std::uint16_t>(rng() % raw)});
    }
    std::sort(s.events.begin(), s.events.end(),
              [](const Event& a, const Event& b) { return a.time_us < b.time_us; });
    ds.samples.push_back(std::move(s));
  }
  const AugmentConfig cfg = AugmentConfig::preset("shd");
  auto augmented = [&](std::uint64_t seed) {
    std::mt19937_64 r(seed);
    std::vector<EventSample> out;
    for (const auto& s : ds.samples) out.push_back(event_drop(s, cfg, raw, r));
    return out;
  };
  const auto a = augmented(312), b = augmented(312);
  std::size_t not_subset = 0, differing = 0, changed = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].events != b[i].events || a[i].label != b[i].label) ++differing;
    if (a[i].events.size() != ds.samples[i].events.size()) ++changed;
    std::multiset<std::pair<std::uint32_t, std::uint16_t>> pool;
    for (const auto& e : ds.samples[i].events) pool.insert({e.time_us, e.neuron});
    for (const auto& e : a[i].events) {
      auto it = pool.find({e.time_us, e.neuron});
      if (it == pool.end()) {
        ++not_subset;
        break;
      }
      pool.erase(it);
    }
  }
  std::size_t presets_loaded = 0;
  for (const char* name : {"shd", "ssc", "gsc"}) {
    const KvDoc doc = KvDoc::parse(std::string("augment.preset = ") + name + "\n");
    KvReader r(doc);
    const AugmentConfig c = read_augment_config(r);
    r.reject_unknown();
    c.validate();
    if (c.enabled()) ++presets_loaded;
  }
  return {not_subset == 0 && differing == 0 && changed > 0 && presets_loaded == 3,
          fmt("200 samples: %zu not subsets, %zu differ on replay, %zu thinned; %zu/3 presets loaded", not_subset,
              differing, changed, presets_loaded)};
}

}  // namespace

// Optional arguments select criteria by number; all run by default.
int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  struct Criterion {
    const char* title;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"LIF dynamics oracle", lif_dynamics},
      {"attention oracle equivalence", attention_oracles},
      {"SWA to global reduction", swa_reduces_to_global},
      {"mask invariance", mask_invariance},
      {"gradient correctness", gradient_check},
      {"binarity fuzz", binarity_fuzz},
      {"linear complexity", linear_complexity},
      {"energy accounting", energy_accounting},
      {"BN folding", bn_folding},
      {"parameter-count anchors", parameter_counts},
      {"desk-scale learnability", learnability},
      {"classification-head normalization", head_normalization},
      {"augmentation determinism and subsets", augmentation},
  };
  int failed = 0, index = 0, ran = 0;
  for (const auto& c : criteria) {
    ++index;
    if (!only.empty() && !only.count(index)) continue;
    ++ran;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index, c.title, o.detail.c_str());
    std::fflush(stdout);
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion selected\n");
    return 2;
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
