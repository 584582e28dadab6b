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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>

#include "doctest.h"
#include "spkc/errors.hpp"
#include "spkc/model.hpp"
#include "spkc/ops.hpp"
#include "support.hpp"

using namespace spkc;
using namespace spkc::testing;

namespace {

ModelConfig tiny(std::size_t n = 6, std::size_t t = 10) {
  ModelConfig c;
  c.blocks = 1;
  c.heads = 2;
  c.hidden = 8;
  c.input_neurons = n;
  c.time_steps = t;
  c.window_radius = 2;
  c.expansion = 2;
  c.classes = 3;
  c.dropout = 0.0;
  return c;
}

// Closed-form parameter count, written from the layer list.
std::size_t expected_params(const ModelConfig& c) {
  const std::size_t D = c.hidden, N = c.input_neurons, H = c.heads, A = c.expansion * D;
  auto proj = [](std::size_t i, std::size_t o) { return i * o + o + 2 * o; };
  const std::size_t see = N * D + D + D * 7 + D + 2 * D + proj(D, D);
  const std::size_t vbranch = H * 9 + H + H * H + H + 2 * H;
  const std::size_t mstasa = 5 * proj(D, D) + vbranch;
  const std::size_t dc = (A / 2) * 31 + A / 2 + 2 * (A / 2);
  const std::size_t scr = proj(D, D) + proj(D, A) + dc + proj(A, D) + proj(D, D);
  return see + c.blocks * (mstasa + scr) + D * c.classes + c.classes;
}

}  // namespace

TEST_CASE("model config") {
  ModelConfig c = tiny();
  c.expansion = 1;
  c.hidden = 7;
  c.heads = 7;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = tiny();
  c.classes = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(ModelConfig::preset("nope"), ConfigError);
  KvDoc doc;
  write_model_config(tiny(), doc);
  KvReader r(doc);
  ModelConfig back = read_model_config(r);
  KvDoc again;
  write_model_config(back, again);
  CHECK(doc.emit() == again.emit());
}

TEST_CASE("scr-mlp widths") {
  std::mt19937_64 rng(31);
  ScrMlp m("scr", 128, 4, rng);
  CHECK(m.pre_lin.out_features() == 512);
  CHECK(m.dc.kernel.value.dim(0) == 256);
  CHECK(m.post_lin.in_features() == 512);
  CHECK_THROWS_AS(ScrMlp("odd", 3, 1, rng), ConfigError);
}

TEST_CASE("scr-mlp with a transparent refinement path equals the unsplit pipeline") {
  std::mt19937_64 rng(32);
  const std::size_t D = 4;
  ScrMlp m("scr", D, 2, rng);
  std::vector<BatchNormState*> norms;
  m.norms(norms);
  for (auto* bn : norms) {
    bn->mode = Mode::kEval;
    bn->init_running_stats();
  }
  std::vector<double> delta(4 * 31, 0.0);
  for (std::size_t c = 0; c < 4; ++c) delta[c * 31 + 15] = 1.0;
  m.dc.kernel.assign(delta);
  m.dc.bn.folded = true;
  Tensor x = random_binary({12, 2, D}, rng);
  ForwardContext ctx;
  Tensor out = m.forward(x, ctx);
  CHECK(is_binary(out));
  CHECK(out.shape() == x.shape());
  ProjectionBlock a = m.pre_pc, b = m.pre_lin, c = m.post_lin, d = m.post_pc;
  Tensor ref = d.forward(c.forward(b.forward(a.forward(x, ctx), ctx), ctx), ctx);
  CHECK(bit_equal(out, ref));
}

TEST_CASE("embedding") {
  std::mt19937_64 rng(33);
  SpikingEmbedding e("see", 140, 256, rng);
  ForwardContext ctx;
  Tensor y = e.forward(random_binary({6, 2, 140}, rng), ctx);
  CHECK(y.shape() == Shape{6, 2, 256});
  CHECK(is_small_integer(y, 2));
}

TEST_CASE("model forward shape and errors") {
  ModelConfig c = ModelConfig::preset("shd-1l-8-128");
  SpikCommanderModel m(c);
  m.set_mode(Mode::kEval);
  m.init_running_stats();
  std::mt19937_64 rng(34);
  Tensor y = m.forward(random_binary({100, 2, 140}, rng, 0.1), TemporalMask::all_valid(100, 2));
  CHECK(y.shape() == Shape{100, 2, 20});
  CHECK_THROWS_AS(m.forward(random_binary({100, 2, 139}, rng), TemporalMask::all_valid(100, 2)),
                  DimensionError);
  CHECK_THROWS_AS(m.forward(Tensor::full({100, 2, 140}, 0.5), TemporalMask::all_valid(100, 2)),
                  InputError);
  CHECK_THROWS_AS(m.forward(random_binary({100, 2, 140}, rng), TemporalMask::all_valid(99, 2)),
                  DimensionError);
}

TEST_CASE("parameter counts") {
  for (const char* name : {"shd-1l-8-128", "ssc-1l-16-256", "ssc-2l-16-256"}) {
    ModelConfig c = ModelConfig::preset(name);
    SpikCommanderModel m(c);
    CHECK(m.parameter_count() == expected_params(c));
  }
  SpikCommanderModel small(ModelConfig::preset("shd-1l-8-128"));
  CHECK(std::abs(static_cast<double>(small.parameter_count()) - 0.19e6) / 0.19e6 < 0.03);
  ModelConfig big = ModelConfig::preset("ssc-2l-16-256");
  CHECK(std::abs(static_cast<double>(expected_params(big)) - 2.13e6) / 2.13e6 < 0.03);
}

TEST_CASE("batch permutation in eval mode") {
  SpikCommanderModel m(tiny());
  m.set_mode(Mode::kEval);
  m.init_running_stats();
  std::mt19937_64 rng(35);
  Tensor x = random_binary({10, 3, 6}, rng, 0.4);
  auto perm_batch = [](const Tensor& t, std::vector<std::size_t> perm) {
    const std::size_t T = t.dim(0), B = t.dim(1), C = t.numel() / (T * B);
    std::vector<double> out(t.numel());
    for (std::size_t s = 0; s < T; ++s)
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < C; ++c) out[(s * B + b) * C + c] = t[(s * B + perm[b]) * C + c];
    return Tensor(t.shape(), out);
  };
  std::vector<std::size_t> perm{2, 0, 1};
  Tensor a = perm_batch(m.forward(x, TemporalMask::all_valid(10, 3)), perm);
  Tensor b = m.forward(perm_batch(x, perm), TemporalMask::all_valid(10, 3));
  CHECK(bit_equal(a, b));
}

TEST_CASE("classify") {
  SUBCASE("symmetric scores") {
    auto r = classify(Tensor::zeros({6, 1, 2}));
    for (double p : r.probabilities.data()) CHECK(p == 0.5);
    CHECK(r.accumulated.to_vector() == std::vector<double>{3.0, 3.0});
    CHECK(r.predicted[0] == 0);
  }
  SUBCASE("hand softmax") {
    auto r = classify(Tensor({1, 1, 2}, {1.0, 0.0}));
    CHECK(r.probabilities[0] == doctest::Approx(0.7311).epsilon(1e-4));
    CHECK(r.probabilities[1] == doctest::Approx(0.2689).epsilon(1e-4));
  }
  SUBCASE("mask drops padded steps") {
    std::vector<std::size_t> len{2};
    auto mask = TemporalMask::from_lengths(5, len);
    auto r = classify(Tensor::zeros({5, 1, 2}), &mask);
    CHECK(r.accumulated.to_vector() == std::vector<double>{1.0, 1.0});
  }
  SUBCASE("normalization and scaling stability") {
    std::mt19937_64 rng(36);
    for (int i = 0; i < 50; ++i) {
      Tensor s = random_uniform({7, 3, 5}, rng, -4, 4);
      auto r = classify(s);
      for (std::size_t b = 0; b < 3; ++b) {
        double sum = 0.0;
        for (std::size_t y = 0; y < 5; ++y) sum += r.accumulated[b * 5 + y];
        CHECK(std::abs(sum - 7.0) < 1e-6);
      }
      // A shared positive per-step scale changes the ranking only through
      // the softmax temperature; a single step keeps the argmax.
      Tensor one = random_uniform({1, 3, 5}, rng, -4, 4);
      CHECK(classify(one).predicted == classify(scale(one, 2.5)).predicted);
    }
  }
}

TEST_CASE("cross entropy") {
  const std::vector<std::size_t> zero{0};
  CHECK(cross_entropy_loss(Tensor({1, 2}, {1.0, 1.0}), zero)[0] ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(cross_entropy_loss(Tensor({1, 2}, {0.99, 0.01}), zero)[0] ==
        doctest::Approx(0.01005).epsilon(1e-3));
  const std::vector<std::size_t> bad{2};
  CHECK_THROWS_AS(cross_entropy_loss(Tensor({1, 2}, {1.0, 1.0}), bad), InputError);
  std::mt19937_64 rng(37);
  const std::vector<std::size_t> labels{1, 0, 2};
  CHECK(grad_check(
            [&](const std::vector<Tensor>& in) {
              return cross_entropy_loss(classify(in[0]).accumulated, labels);
            },
            {random_uniform({4, 3, 3}, rng, -2, 2)}) < 1e-4);
}

TEST_CASE("smooth twin with batch statistics matches small-step differences") {
  ModelConfig c = tiny(3, 6);
  c.hidden = 4;
  c.classes = 2;
  SpikCommanderModel m(c);
  std::mt19937_64 rng(39);
  auto params = m.parameters();
  for (auto* p : params) {
    auto v = p->value.to_vector();
    for (auto& x : v) x += std::uniform_real_distribution<double>(-0.2, 0.2)(rng);
    p->assign(v);
  }
  const Tensor x = random_binary({6, 4, 3}, rng);
  const std::vector<std::size_t> lengths{6, 5, 6, 4}, labels{0, 1, 1, 0};
  const TemporalMask mask = TemporalMask::from_lengths(6, lengths);
  auto loss = [&](Tape* tape) {
    ForwardOptions fo;
    fo.tape = tape;
    fo.spike_fn = SpikeFn::kSmoothTwin;
    return cross_entropy_loss(classify(m.forward(x, mask, fo), &mask).accumulated, labels);
  };
  REQUIRE(m.mode() == Mode::kTrain);
  Tape tape;
  tape.backward(loss(&tape));
  // Train-mode BN makes the twin rough on a 1e-4 scale, hence the small step.
  const double h = 1e-6;
  double worst = 0.0;
  for (auto* p : params) {
    const auto base = p->value.to_vector();
    for (std::size_t i = 0; i < base.size(); ++i) {
      auto v = base;
      v[i] += h;
      p->assign(v);
      const double up = loss(nullptr)[0];
      v[i] = base[i] - h;
      p->assign(v);
      const double down = loss(nullptr)[0];
      p->assign(base);
      worst = std::max(worst, rel_error(p->grad[i], (up - down) / (2 * h), 1e-4));
    }
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("checkpoint round trip") {
  ModelConfig c = tiny();
  c.init_seed = 99;
  SpikCommanderModel m(c);
  m.init_running_stats();
  m.norms()[0]->running_mean[0] = 0.25f;
  auto bytes = serialize_checkpoint(m);
  SpikCommanderModel back = deserialize_checkpoint(bytes);
  auto pa = m.parameters(), pb = back.parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i]->name == pb[i]->name);
    for (std::size_t j = 0; j < pa[i]->numel(); ++j) {
      CHECK(static_cast<float>(pa[i]->value[j]) == static_cast<float>(pb[i]->value[j]));
    }
  }
  CHECK(back.norms()[0]->running_mean[0] == 0.25);
  CHECK(back.config().init_seed == 99);

  auto corrupt = bytes;
  corrupt[40] ^= 0x1;
  CHECK_THROWS_AS(deserialize_checkpoint(corrupt), FormatError);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_checkpoint(bad_magic), FormatError);
  CHECK_THROWS_AS(deserialize_checkpoint(std::vector<char>(bytes.begin(), bytes.begin() + 6)),
                  IoError);

  const auto path = std::filesystem::temp_directory_path() / "spkc_ckpt_test.bin";
  save_checkpoint(m, path.string());
  CHECK(load_checkpoint(path.string()).parameter_count() == m.parameter_count());
  std::filesystem::remove(path);
}

TEST_CASE("bn folding keeps eval outputs") {
  SpikCommanderModel m(tiny());
  std::mt19937_64 rng(38);
  Tensor x = random_binary({10, 4, 6}, rng, 0.4);
  m.forward(x, TemporalMask::all_valid(10, 4));  // train mode: collect statistics
  m.set_mode(Mode::kEval);
  Tensor before = m.forward(x, TemporalMask::all_valid(10, 4));
  m.fold_batchnorm();
  CHECK(m.folded());
  Tensor after = m.forward(x, TemporalMask::all_valid(10, 4));
  CHECK(max_abs_diff(before, after) < 1e-5);
  CHECK_THROWS_AS(m.fold_batchnorm(), ConfigError);
  CHECK_THROWS_AS(m.set_mode(Mode::kTrain), ConfigError);
}
