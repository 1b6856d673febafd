// Copyright 2026 The clampqp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "clampqp/bench.hpp"
#include "clampqp/oracle.hpp"

using namespace clampqp;
using oracle::AdmmState;
using oracle::ReorderedState;

namespace {

QProblem box_1d() {
  QProblem p;
  p.H = Mat{{2.0}};
  p.g = Vec{{-2.0}};
  p.G = Mat{{1.0}};
  p.c = Vec{{0.0}};
  p.d = Vec{{0.5}};
  return p;
}

AdmmState random_state(bench::Rng& rng, Index n, Index m) {
  AdmmState s;
  s.ybar = rng.normal_vector(n);
  s.y = rng.normal_vector(n);
  s.z = rng.normal_vector(m);
  s.mu = rng.normal_vector(n);
  s.lambda = rng.normal_vector(m);
  return s;
}

}  // namespace

TEST_CASE("mu is exactly zero after one original-order step") {
  bench::Rng rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const QProblem p = bench::gen_random_dense_qp(8, static_cast<std::uint64_t>(trial));
    AdmmState s = random_state(rng, 8, p.num_constraints());
    s = admm_step_original(s, p, 1e-6, Vec::Constant(p.num_constraints(), 0.1));
    CHECK(s.mu.cwiseAbs().maxCoeff() == 0.0);

    // From the second step on, ybar and y coincide exactly.
    s = admm_step_original(s, p, 1e-6, Vec::Constant(p.num_constraints(), 0.1));
    CHECK(s.mu.cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.ybar == s.y);
  }
}

TEST_CASE("mu stays zero when starting from zero") {
  const QProblem p = box_1d();
  AdmmState s = AdmmState::zero(1, 1);
  s = admm_step_original(s, p, 1e-6, Vec{{1.0}});
  CHECK(s.mu[0] == 0.0);
}

TEST_CASE("original oracle rejects sigma = 0") {
  const QProblem p = box_1d();
  CHECK_THROWS_AS(admm_step_original(AdmmState::zero(1, 1), p, 0.0, Vec{{1.0}}),
                  std::invalid_argument);
}

TEST_CASE("500 original steps converge to the 1-D optimum") {
  const QProblem p = box_1d();
  AdmmState s = AdmmState::zero(1, 1);
  for (int i = 0; i < 500; ++i) s = admm_step_original(s, p, 1e-6, Vec{{1.0}});
  CHECK(s.y[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(s.lambda[0] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("pure equality rows project z onto the target") {
  QProblem p = box_1d();
  p.c = Vec{{0.3}};
  p.d = Vec{{0.3}};
  bench::Rng rng(2);
  AdmmState s = random_state(rng, 1, 1);
  for (int i = 0; i < 3; ++i) {
    s = admm_step_original(s, p, 1e-6, Vec{{1.0}});
    CHECK(s.z[0] == 0.3);
  }
}

TEST_CASE("reordered 1-D step reproduces the hand-worked iterate") {
  const QProblem p = box_1d();
  const ReorderedState next =
      admm_step_reordered(ReorderedState::zero(1, 1), p, 0.0, Vec{{1.0}});
  CHECK(next.y[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(next.z[0] == 0.5);
  CHECK(next.lambda[0] == 0.0);
}

TEST_CASE("lambda update is a no-op when z = Gy and lambda = 0") {
  const QProblem p = bench::gen_random_dense_qp(8, 3);
  bench::Rng rng(4);
  ReorderedState s;
  s.y = rng.normal_vector(8);
  s.z = p.G * s.y;
  s.lambda = Vec::Zero(p.num_constraints());
  const ReorderedState next =
      admm_step_reordered(s, p, 1e-6, Vec::Constant(p.num_constraints(), 0.1));
  CHECK(next.lambda.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("original and reordered orders walk the same y, z sequence") {
  bench::Rng rng(5);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const QProblem p = bench::gen_random_dense_qp(8, seed);
    const Index m = p.num_constraints();
    const Vec rho_vec = Vec::Constant(m, 0.7);
    const double sigma = 1e-6;

    const Vec y0 = rng.normal_vector(8);
    const Vec z0 = rng.normal_vector(m);
    const Vec lambda0 = rng.normal_vector(m);

    AdmmState orig;
    orig.ybar = y0;
    orig.y = y0;
    orig.z = z0;
    orig.mu = Vec::Zero(8);
    orig.lambda = lambda0;

    // The reordered form re-times the lambda update: starting it from lambda
    // before its own update aligns the two sequences.
    ReorderedState reord;
    reord.y = y0;
    reord.z = z0;
    reord.lambda = lambda0 - rho_vec.cwiseProduct(Vec(p.G * y0 - z0));

    for (int step = 0; step < 50; ++step) {
      orig = admm_step_original(orig, p, sigma, rho_vec);
      reord = admm_step_reordered(reord, p, sigma, rho_vec);
      CHECK((orig.y - reord.y).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK((orig.z - reord.z).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("brute force solves the three 1-D benchmarks") {
  QProblem p = box_1d();

  SUBCASE("upper bound active") {
    const Solution sol = oracle::brute_force_kkt(p);
    CHECK(sol.y[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sol.lambda[0] == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("equality constraint") {
    p.H = Mat{{1.0}};
    p.g = Vec{{0.0}};
    p.c = Vec{{1.0}};
    p.d = Vec{{1.0}};
    const Solution sol = oracle::brute_force_kkt(p);
    CHECK(sol.y[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.lambda[0] == doctest::Approx(-1.0).epsilon(1e-12));
  }

  SUBCASE("interior optimum") {
    p.c = Vec{{-10.0}};
    p.d = Vec{{10.0}};
    const Solution sol = oracle::brute_force_kkt(p);
    CHECK(sol.y[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.lambda[0] == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("brute force rejects an infeasible problem") {
  QProblem p;
  p.H = Mat{{1.0}};
  p.g = Vec{{0.0}};
  p.G = Mat{{1.0}, {1.0}};
  p.c = Vec{{0.0, 5.0}};
  p.d = Vec{{0.1, 6.0}};
  CHECK_THROWS_AS(oracle::brute_force_kkt(p), std::runtime_error);
}

TEST_CASE("brute force respects multiplier sign conventions") {
  // min 0.5 y'y - [3, 3]'y with 0 <= y <= 1 elementwise: both upper bounds
  // bind with lambda = 2 each; adding a lower-bound-active third row checks
  // the negative sign.
  QProblem p;
  p.H = Mat::Identity(2, 2);
  p.g = Vec{{-3.0, -3.0}};
  p.G = Mat{{1.0, 0.0}, {0.0, 1.0}, {1.0, -1.0}};
  p.c = Vec{{0.0, 0.0, 0.0}};
  p.d = Vec{{1.0, 1.0, kInf}};
  const Solution sol = oracle::brute_force_kkt(p);
  CHECK(sol.y[0] == doctest::Approx(1.0));
  CHECK(sol.y[1] == doctest::Approx(1.0));
  CHECK(sol.lambda[0] >= 0.0);
  CHECK(sol.lambda[1] >= 0.0);
  CHECK(sol.r_dual < 1e-10);
}
