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

#include <cstdio>
#include <fstream>
#include <sstream>

#include "clampqp/bench.hpp"

using namespace clampqp;
using namespace clampqp::bench;

namespace {

// Drops the wall_ms column (index 7) from every CSV line.
std::string strip_wall_ms(const std::string& csv) {
  std::istringstream in(csv);
  std::string out, line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string field, rebuilt;
    int idx = 0;
    while (std::getline(fields, field, ',')) {
      if (idx++ == 7) continue;
      if (!rebuilt.empty()) rebuilt += ',';
      rebuilt += field;
    }
    out += rebuilt + '\n';
  }
  return out;
}

}  // namespace

TEST_CASE("random QP generation is deterministic in (n, seed)") {
  const QProblem a = gen_random_dense_qp(24, 7);
  const QProblem b = gen_random_dense_qp(24, 7);
  CHECK(a.H == b.H);
  CHECK(a.g == b.g);
  CHECK(a.G == b.G);
  CHECK(a.c == b.c);
  CHECK(a.d == b.d);

  const QProblem other = gen_random_dense_qp(24, 8);
  CHECK(a.G != other.G);
}

TEST_CASE("n = 100 gives 25 equality and 25 inequality rows") {
  const QProblem p = gen_random_dense_qp(100, 0);
  CHECK(p.num_constraints() == 50);
  const auto kinds = constraint_kinds(p);
  int eq = 0, ineq = 0;
  for (auto kind : kinds) (kind == ConstraintKind::Equality ? eq : ineq)++;
  CHECK(eq == 25);
  CHECK(ineq == 25);
}

TEST_CASE("generated problems validate and are feasible at the witness") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Vec y0;
    const QProblem p = gen_random_dense_qp(20, seed, &y0);
    CHECK_NOTHROW(validate(p));
    const Vec gy0 = p.G * y0;
    for (Index i = 0; i < p.num_constraints(); ++i) {
      CHECK(gy0[i] >= p.c[i] - 1e-12);
      CHECK(gy0[i] <= p.d[i] + 1e-12);
    }
  }
  CHECK_THROWS_AS(gen_random_dense_qp(3, 0), std::invalid_argument);
}

TEST_CASE("random linear systems have the 3:1 shape and requested stability") {
  const auto stable = gen_random_linear_system(2, 1, false);
  CHECK(stable.nx() == 6);
  CHECK(stable.nu() == 2);
  const double sr_stable = spectral_radius(stable.A);
  CHECK(sr_stable >= 0.8 - 1e-9);
  CHECK(sr_stable <= 0.95 + 1e-9);
  CHECK(mpc::controllability_rank(stable) == 6);

  const auto unstable = gen_random_linear_system(2, 1, true);
  const double sr = spectral_radius(unstable.A);
  CHECK(sr >= 1.05 - 1e-9);
  CHECK(sr <= 1.3 + 1e-9);

  const auto big = gen_random_linear_system(10, 0, false);
  CHECK(big.nx() == 30);

  const auto again = gen_random_linear_system(2, 1, false);
  CHECK(again.A == stable.A);
  CHECK(again.B == stable.B);
}

TEST_CASE("closed loop at the origin stays at the origin") {
  const auto sys = gen_random_linear_system(2, 3, false);
  const auto weights =
      mpc::lqr_terminal_weights(sys, Mat::Identity(6, 6), Mat::Identity(2, 2), 20);
  const auto limits = mpc::BoxLimits::symmetric_control(2, 1.0);
  const auto run = simulate_closed_loop(sys, weights, limits, Vec::Zero(6), 50, 1);
  CHECK(run.states.cwiseAbs().maxCoeff() == 0.0);
  CHECK(run.controls.cwiseAbs().maxCoeff() == 0.0);
  CHECK(run.steps_to_stabilize == 0);
}

TEST_CASE("double integrator stabilizes in 300 steps with one iteration per step") {
  mpc::LinearSystem sys{Mat{{1.0, 0.1}, {0.0, 1.0}}, Mat{{0.005}, {0.1}}};
  const auto weights =
      mpc::lqr_terminal_weights(sys, Mat::Identity(2, 2), Mat{{1.0}}, 40);
  const auto limits = mpc::BoxLimits::symmetric_control(1, 0.5);
  const auto run = simulate_closed_loop(sys, weights, limits, Vec{{1.0, 0.0}}, 300, 1);
  CHECK(run.stabilized);
  CHECK(run.steps_to_stabilize <= 300);
  CHECK(run.activity_fraction > 0.0);  // the +-0.5 limit binds early on
  CHECK_FALSE(run.diverged);
}

TEST_CASE("x0 scaling drives limit activity above the target") {
  const auto sys = gen_random_linear_system(2, 5, false);
  const auto lqr = mpc::lqr_gain(sys, Mat::Identity(6, 6), Mat::Identity(2, 2));
  mpc::MpcWeights weights{Mat::Identity(6, 6), Mat::Identity(2, 2), lqr.P, 20};
  const auto limits = mpc::BoxLimits::symmetric_control(2, 1.0);
  const auto tmpl = mpc::build_condensed_mpc(sys, weights, limits, lqr.K);
  Solver solver(mpc::instantiate(tmpl, Vec::Zero(6)), SolverSettings{});

  Rng rng(99);
  const Vec x0 = scale_x0_for_activity(tmpl, solver, sys, limits, rng.normal_vector(6));
  solver.cold_start();
  const auto probe = simulate_closed_loop(tmpl, solver, sys, limits, x0, 50, 0);
  CHECK(probe.activity_fraction >= 0.2);
}

TEST_CASE("QP suite produces |sizes| x |seeds| converged records") {
  BenchConfig config;
  config.suite = BenchConfig::Suite::RandomQp;
  config.sizes = {10, 20};
  config.seeds = 3;
  const auto records = run_suite(config);
  REQUIRE(records.size() == 6);
  for (const auto& rec : records) {
    CHECK(rec.suite == "random-qp");
    CHECK(rec.converged);
    CHECK(rec.r_prim <= 1e-6);
    CHECK(rec.r_dual <= 1e-6);
    CHECK(rec.steps_to_stabilize == -1);
  }
  CHECK(records[0].size == 10);
  CHECK(records[3].size == 20);
  CHECK(records[4].seed == 1);
}

TEST_CASE("CSV schema and determinism modulo wall time") {
  BenchConfig config;
  config.suite = BenchConfig::Suite::RandomQp;
  config.sizes = {10};
  config.seeds = 2;

  const std::string csv_a = to_csv(run_suite(config));
  const std::string csv_b = to_csv(run_suite(config));

  std::istringstream in(csv_a);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "suite,n_or_nu,seed,iterations,r_prim,r_dual,converged,wall_ms,"
        "steps_to_stabilize,activity_fraction");

  CHECK(strip_wall_ms(csv_a) == strip_wall_ms(csv_b));
}

TEST_CASE("MPC suite emits one record per (size, seed)") {
  BenchConfig config;
  config.suite = BenchConfig::Suite::RandomMpc;
  config.sizes = {2};
  config.seeds = 2;
  config.horizon = 20;
  config.steps = 150;
  const auto records = run_suite(config);
  REQUIRE(records.size() == 2);
  for (const auto& rec : records) {
    CHECK(rec.suite == "random-mpc");
    CHECK(rec.size == 2);
    CHECK(rec.activity_fraction >= 0.2);
    CHECK(rec.converged);
  }
}

TEST_CASE("run_suite writes the CSV and rejects unwritable paths") {
  BenchConfig config;
  config.suite = BenchConfig::Suite::RandomQp;
  config.sizes = {10};
  config.seeds = 1;
  config.output_path = "test_bench_out.csv";

  const auto records = run_suite(config);
  std::ifstream in(config.output_path);
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  CHECK(buffer.str() == to_csv(records));
  in.close();
  std::remove(config.output_path.c_str());

  config.output_path = "/nonexistent-dir/never/out.csv";
  CHECK_THROWS_AS(run_suite(config), std::runtime_error);
}
