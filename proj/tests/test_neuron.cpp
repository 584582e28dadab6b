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
#include <numbers>
#include <random>

#include "doctest.h"
#include "spkc/errors.hpp"
#include "spkc/neuron.hpp"
#include "spkc/ops.hpp"
#include "support.hpp"

using namespace spkc;
using namespace spkc::testing;

namespace {

std::pair<double, double> step1(double v, double x) {
  LifParams p;
  auto [s, st] = lif_step(Tensor({1}, {x}), LifState{Tensor({1}, {v})}, p);
  return {s.tensor()[0], st.v[0]};
}

}  // namespace

TEST_CASE("lif_step hand values") {
  auto [s0, v0] = step1(0.5, 0.0);
  CHECK(s0 == 0.0);
  CHECK(v0 == 0.5);
  auto [s1, v1] = step1(0.5, 0.6);
  CHECK(s1 == 1.0);
  CHECK(v1 == 0.5);
  auto [s2, v2] = step1(0.9, 0.0);
  CHECK(s2 == 0.0);
  CHECK(v2 == doctest::Approx(0.7).epsilon(1e-15));
  // Spike exactly at threshold.
  auto [s3, v3] = step1(0.5, 0.5);
  CHECK(s3 == 1.0);
  CHECK(v3 == 0.5);
}

TEST_CASE("lif params validation") {
  CHECK_THROWS_AS((LifParams{0.5, 1.0, 0.5}.validate()), ConfigError);
  CHECK_THROWS_AS((LifParams{2.0, 0.5, 0.5}.validate()), ConfigError);
  CHECK_THROWS_AS((SurrogateParams{0.0}.validate()), ConfigError);
  CHECK_NOTHROW(LifParams{}.validate());
}

TEST_CASE("lif_sequence") {
  LifParams p;
  SUBCASE("zero input stays at rest") {
    auto tr = lif_trace(Tensor::zeros({8, 2, 3}), p);
    for (double s : tr.s.data()) CHECK(s == 0.0);
    for (double v : tr.v.data()) CHECK(v == 0.5);
  }
  SUBCASE("constant 0.6 spikes every step") {
    auto s = lif_sequence(Tensor::full({10, 1, 1}, 0.6), p);
    for (double v : s.tensor().data()) CHECK(v == 1.0);
  }
  SUBCASE("constant 0.3 matches the step oracle") {
    Tensor x = Tensor::full({20, 1, 1}, 0.3);
    auto s = lif_sequence(x, p);
    CHECK(bit_equal(s.tensor(), lif_sequence_oracle(x, p)));
    // 0.5 -> 0.8 -> 0.95 -> 1.025 fires on the third step, then repeats.
    CHECK(s.tensor().to_vector()[2] == 1.0);
    CHECK(s.tensor().to_vector()[0] == 0.0);
  }
}

TEST_CASE("binarity, reset and memory under fuzzing") {
  std::mt19937_64 rng(11);
  LifParams p;
  for (int trial = 0; trial < 1000; ++trial) {
    Tensor x = random_uniform({6, 2, 3}, rng, -2.0, 2.0);
    auto tr = lif_trace(x, p);
    CHECK(is_binary(lif_sequence(x, p).tensor()));
    for (std::size_t i = 0; i < x.numel(); ++i) {
      if (tr.s[i] == 1.0) {
        REQUIRE(tr.v[i] == p.v_reset);
      } else {
        REQUIRE(tr.v[i] == tr.h[i]);
      }
    }
  }
}

TEST_CASE("surrogate derivative") {
  SurrogateParams sg;
  CHECK(surrogate_grad(0.0, sg) == 2.5);
  double prev = surrogate_grad(0.0, sg);
  for (double u = 0.1; u < 50.0; u *= 1.5) {
    const double g = surrogate_grad(u, sg);
    CHECK(g < prev);
    CHECK(g == surrogate_grad(-u, sg));
    prev = g;
  }
  // Trapezoid quadrature over a wide interval.
  double area = 0.0;
  const double lo = -2000.0, hi = 2000.0, du = 1e-3;
  for (double u = lo; u < hi; u += du) area += 0.5 * du * (surrogate_grad(u, sg) + surrogate_grad(u + du, sg));
  CHECK(area == doctest::Approx(1.0).epsilon(1e-3));
  // The smooth primitive differentiates to the surrogate.
  for (double u : {-0.3, 0.0, 0.05, 0.7}) {
    const double h = 1e-6;
    const double d = (smooth_spike(u + h, sg) - smooth_spike(u - h, sg)) / (2 * h);
    CHECK(d == doctest::Approx(surrogate_grad(u, sg)).epsilon(1e-6));
  }
}

TEST_CASE("BPTT uses the surrogate with a detached reset") {
  // Two steps, one neuron: hand-derived gradient of S[1] w.r.t. x[0].
  LifParams p;
  SurrogateParams sg;
  Tape tape;
  Tensor x = tape.variable(Tensor({2, 1}, {0.3, 0.4}));
  Tensor s = spike_sequence(x, NeuronConfig{p, sg, SpikeFn::kHeaviside});
  tape.backward(dot_all(s, std::vector<double>{0.0, 1.0}));
  const double h0 = 0.5 + 0.3, h1 = h0 - 0.5 * (h0 - 0.5) + 0.4;
  const double g1 = surrogate_grad(h1 - 1.0, sg);
  // dS1/dx0 = g(h1) * dH1/dV0 * dV0/dH0 = g(h1) * (1 - 1/tau) * (1 - S0), S0 = 0.
  CHECK(tape.grad(x)[0] == doctest::Approx(g1 * 0.5).epsilon(1e-12));
  CHECK(tape.grad(x)[1] == doctest::Approx(g1).epsilon(1e-12));
}

TEST_CASE("smooth twin passes finite differences") {
  std::mt19937_64 rng(12);
  NeuronConfig cfg{{}, {}, SpikeFn::kSmoothTwin};
  Tensor w = random_uniform({8, 3, 2}, rng);
  const double err = grad_check(
      [&](const std::vector<Tensor>& in) { return dot_all(spike_sequence(in[0], cfg), w.data()); },
      {random_uniform({8, 3, 2}, rng, -0.5, 1.5)});
  CHECK(err < 1e-4);
}
