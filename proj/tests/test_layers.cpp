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

#include <cmath>

#include "clampqp/bench.hpp"
#include "clampqp/layers.hpp"

using namespace clampqp;

namespace {

// Independent reassembly of the fused matrix straight from its block
// definition, using plain dense diagonal products.
Mat reconstruct_w(const Mat& H, const Mat& G, double sigma, const Vec& rho_vec) {
  const Index n = H.rows();
  const Index m = G.rows();
  const Mat rho = Vec(rho_vec).asDiagonal();
  const Mat rho_inv = Vec(rho_vec.cwiseInverse()).asDiagonal();
  const Mat D = (H + sigma * Mat::Identity(n, n) + G.transpose() * rho * G).inverse();
  const Mat T = sigma * Mat::Identity(n, n) - G.transpose() * rho * G;

  Mat W(n + 2 * m, n + 2 * m);
  W.block(0, 0, n, n) = D * T;
  W.block(0, n, n, m) = 2.0 * D * G.transpose() * rho;
  W.block(0, n + m, n, m) = -D * G.transpose();
  W.block(n, 0, m, n) = G * D * T + G;
  W.block(n, n, m, m) = 2.0 * G * D * G.transpose() * rho - Mat::Identity(m, m);
  W.block(n, n + m, m, m) = -G * D * G.transpose() + rho_inv;
  W.block(n + m, 0, m, n) = rho * G;
  W.block(n + m, n, m, m) = -rho;
  W.block(n + m, n + m, m, m) = Mat::Identity(m, m);
  return W;
}

QProblem eq_ineq_problem() {
  QProblem p;
  p.H = Mat{{2.0, 0.0}, {0.0, 3.0}};
  p.g = Vec{{1.0, -1.0}};
  p.G = Mat{{1.0, 0.0}, {0.0, 1.0}};
  p.c = Vec{{0.5, -1.0}};
  p.d = Vec{{0.5, 1.0}};  // row 0 equality, row 1 inequality
  return p;
}

}  // namespace

TEST_CASE("7-point grid is the decade grid with initial value 0.1") {
  const PenaltyGrid grid = build_penalty_grid(7);
  REQUIRE(grid.size() == 7);
  const double expected[] = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  for (int k = 0; k < 7; ++k) {
    CHECK(grid.value(k) == doctest::Approx(expected[k]).epsilon(1e-14));
  }
  CHECK(grid.initial_index == 2);
  CHECK(grid.eq_scale == 1e3);
}

TEST_CASE("2-point grid keeps the endpoints and starts at the log-nearest point") {
  const PenaltyGrid grid = build_penalty_grid(2);
  CHECK(grid.value(0) == 1e-3);
  CHECK(grid.value(1) == 1e3);
  // log10(0.1) = -1 is distance 2 from -3 and 4 from +3.
  CHECK(grid.initial_index == 0);
}

TEST_CASE("grids are positive and strictly increasing") {
  for (int n : {2, 7, 13, 25}) {
    const PenaltyGrid grid = build_penalty_grid(n);
    for (int k = 0; k < grid.size(); ++k) {
      CHECK(grid.value(k) > 0.0);
      if (k > 0) CHECK(grid.value(k) > grid.value(k - 1));
    }
  }
  CHECK(build_penalty_grid(13).initial_index == 4);  // half-decade grid hits 0.1
  CHECK_THROWS_AS(build_penalty_grid(1), std::invalid_argument);
}

TEST_CASE("ruiz leaves an already-equilibrated problem alone") {
  QProblem p;
  p.H = Mat::Identity(3, 3);
  p.g = Vec::Ones(3);
  p.G = Mat::Identity(3, 3);
  p.c = Vec::Zero(3);
  p.d = Vec::Ones(3);
  const auto [scaled, scaling] = ruiz_equilibrate(p);
  CHECK(scaling.E == Vec::Ones(3));
  CHECK(scaling.F == Vec::Ones(3));
  CHECK(scaling.cost_scale == 1.0);
  CHECK(scaled.H == p.H);
  CHECK(scaled.G == p.G);
}

TEST_CASE("ruiz tames a badly scaled scalar problem") {
  QProblem p;
  p.H = Mat{{10000.0}};
  p.g = Vec{{1.0}};
  p.G = Mat{{1.0}};
  p.c = Vec{{0.0}};
  p.d = Vec{{1.0}};
  const auto [scaled, scaling] = ruiz_equilibrate(p);
  CHECK(scaled.H(0, 0) >= 0.5);
  CHECK(scaled.H(0, 0) <= 2.0);
}

TEST_CASE("ruiz brings stacked row norms near one on random problems") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    QProblem p = bench::gen_random_dense_qp(16, seed);
    p.H *= 1e4;  // make it worth equilibrating
    p.G.row(0) *= 1e-3;
    const auto [scaled, scaling] = ruiz_equilibrate(p);

    const Index n = p.num_vars();
    const Index m = p.num_constraints();
    for (Index i = 0; i < n; ++i) {
      const double r = std::max(scaled.H.row(i).cwiseAbs().maxCoeff() / scaling.cost_scale,
                                scaled.G.col(i).cwiseAbs().maxCoeff());
      CHECK(r >= 0.5);
      CHECK(r <= 1.5);
    }
    for (Index i = 0; i < m; ++i) {
      const double r = scaled.G.row(i).cwiseAbs().maxCoeff();
      CHECK(r >= 0.5);
      CHECK(r <= 1.5);
    }
  }
}

TEST_CASE("equilibrating an equilibrated problem changes scales marginally") {
  const QProblem p = bench::gen_random_dense_qp(12, 3);
  const auto [scaled, first] = ruiz_equilibrate(p, 50, 1e-10);
  const auto [rescaled, second] = ruiz_equilibrate(scaled, 50, 1e-10);
  CHECK((second.E.array() - 1.0).abs().maxCoeff() < 1e-3);
  CHECK((second.F.array() - 1.0).abs().maxCoeff() < 1e-3);
}

TEST_CASE("scaling round-trips to 1e-12 relative error") {
  const QProblem p = bench::gen_random_dense_qp(12, 7);
  const auto [scaled, scaling] = ruiz_equilibrate(p);
  const QProblem back = scaling.unapply(scaled);
  CHECK((back.H - p.H).cwiseAbs().maxCoeff() <= 1e-12 * inf_norm(p.H));
  CHECK((back.g - p.g).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, inf_norm(p.g)));
  CHECK((back.G - p.G).cwiseAbs().maxCoeff() <= 1e-12 * inf_norm(p.G));
  for (Index i = 0; i < p.num_constraints(); ++i) {
    CHECK(back.c[i] == doctest::Approx(p.c[i]).epsilon(1e-12));
    CHECK(back.d[i] == doctest::Approx(p.d[i]).epsilon(1e-12));
  }
}

TEST_CASE("kkt inverse on scalar and diagonal examples") {
  CHECK(build_kkt_inverse(Mat{{1.0}}, Mat{{1.0}}, 0.0, Vec{{1.0}})(0, 0) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(build_kkt_inverse(Mat{{2.0}}, Mat{{1.0}}, 1e-6, Vec{{0.1}})(0, 0) ==
        doctest::Approx(1.0 / 2.100001).epsilon(1e-12));

  const Mat D = build_kkt_inverse(Mat{{1.0, 0.0}, {0.0, 4.0}}, Mat{{1.0, 0.0}}, 0.0,
                                  Vec{{1.0}});
  CHECK(D(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(D(1, 1) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(std::abs(D(0, 1)) < 1e-15);
}

TEST_CASE("kkt inverse satisfies its defining identity") {
  const QProblem p = bench::gen_random_dense_qp(20, 11);
  const Vec rho_vec = Vec::Constant(p.num_constraints(), 0.37);
  const Mat D = build_kkt_inverse(p.H, p.G, 1e-6, rho_vec);
  Mat kkt = p.H + 1e-6 * Mat::Identity(20, 20);
  kkt += p.G.transpose() * rho_vec.asDiagonal() * p.G;
  CHECK(inf_norm(Mat(D * kkt - Mat::Identity(20, 20))) < 1e-8);
}

TEST_CASE("kkt inverse reports factorization failure") {
  CHECK_THROWS_AS(build_kkt_inverse(Mat{{-1.0}}, Mat{{0.0}}, 0.0, Vec{{1.0}}),
                  std::runtime_error);
}

TEST_CASE("1-D fused matrix matches the hand-worked blocks") {
  const Mat H{{2.0}};
  const Mat G{{1.0}};
  const Vec g{{-2.0}};
  const Vec rho_vec{{1.0}};
  const Mat D = build_kkt_inverse(H, G, 0.0, rho_vec);
  const Layer layer = build_layer(H, G, g, 0.0, rho_vec, D);

  Mat expected(3, 3);
  expected << -1.0 / 3.0, 2.0 / 3.0, -1.0 / 3.0,  //
      2.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0,           //
      1.0, -1.0, 1.0;
  CHECK((layer.W - expected).cwiseAbs().maxCoeff() < 1e-15);

  const Vec b_expected{{2.0 / 3.0, 2.0 / 3.0, 0.0}};
  CHECK((layer.b - b_expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("bias is linear in g and rebuilds from cached D, GD") {
  const QProblem p = bench::gen_random_dense_qp(8, 5);
  const Vec rho_vec = Vec::Constant(p.num_constraints(), 0.1);
  const Mat D = build_kkt_inverse(p.H, p.G, 1e-6, rho_vec);
  const Layer layer = build_layer(p.H, p.G, Vec::Zero(8), 1e-6, rho_vec, D);
  CHECK(layer.b.isZero(0.0));

  const Vec g2 = Vec::LinSpaced(8, -1.0, 1.0);
  const Vec b2 = layer_bias(layer, g2);
  CHECK((b2.head(8) + D * g2).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((b2.segment(8, p.num_constraints()) + p.G * D * g2).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(b2.tail(p.num_constraints()).isZero(0.0));
}

TEST_CASE("precompute caches one layer per grid point with the row penalty rule") {
  const QProblem p = eq_ineq_problem();
  const PenaltyGrid grid = build_penalty_grid(7);
  const LayerCache cache = precompute_all(p, grid, 1e-6, Equilibration{false});
  REQUIRE(cache.layers.size() == 7);

  // At grid value 0.1 the equality row gets 1000x the base penalty.
  const Layer& layer = cache.layer(2);
  CHECK(layer.rho_vec[0] == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(layer.rho_vec[1] == doctest::Approx(0.1).epsilon(1e-14));

  for (int k = 0; k < grid.size(); ++k) {
    CHECK(cache.layer(k).rho_vec[0] ==
          doctest::Approx(1e3 * grid.value(k)).epsilon(1e-14));
    CHECK(cache.layer(k).rho_vec[1] == doctest::Approx(grid.value(k)).epsilon(1e-14));
  }

  // Clamp bounds: [-inf; c; -inf] and [inf; d; inf].
  CHECK(cache.c_tilde.head(2).minCoeff() == -kInf);
  CHECK(cache.c_tilde.segment(2, 2) == p.c);
  CHECK(cache.d_tilde.segment(2, 2) == p.d);
  CHECK(cache.d_tilde.tail(2).maxCoeff() == kInf);
}

TEST_CASE("cached GD equals G times D on a random 5x3 instance") {
  bench::Rng rng(21);
  QProblem p;
  const Mat M = rng.normal_matrix(3, 3);
  p.H = M.transpose() * M + 0.1 * Mat::Identity(3, 3);
  p.H = 0.5 * (p.H + p.H.transpose());
  p.g = rng.normal_vector(3);
  p.G = rng.normal_matrix(5, 3);
  p.c = Vec::Constant(5, -1.0);
  p.d = Vec::Constant(5, 1.0);

  const LayerCache cache =
      precompute_all(p, build_penalty_grid(7), 1e-6, Equilibration{false});
  for (const Layer& layer : cache.layers) {
    CHECK((layer.GD - p.G * layer.D).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("every cached W matches the block reconstruction to 1e-10") {
  const QProblem p = bench::gen_random_dense_qp(12, 17);
  const LayerCache cache =
      precompute_all(p, build_penalty_grid(7), 1e-6, Equilibration{true});
  for (const Layer& layer : cache.layers) {
    const Mat expected =
        reconstruct_w(cache.problem.H, cache.problem.G, cache.sigma, layer.rho_vec);
    CHECK((layer.W - expected).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("update_vectors rebuilds biases and clamp bounds in place") {
  const QProblem p = eq_ineq_problem();
  LayerCache cache = precompute_all(p, build_penalty_grid(7), 1e-6, Equilibration{true});

  const Vec g2{{0.2, 0.4}};
  const Vec c2{{0.1, -2.0}};
  const Vec d2{{0.1, 2.0}};
  cache.update_vectors(g2, c2, d2);

  for (const Layer& layer : cache.layers) {
    CHECK((layer.b - layer_bias(layer, cache.problem.g)).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(cache.c_tilde.segment(2, 2) == Vec(cache.scaling.F.cwiseProduct(c2)));
  CHECK(cache.d_tilde.segment(2, 2) == Vec(cache.scaling.F.cwiseProduct(d2)));
}
